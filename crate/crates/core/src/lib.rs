pub mod analysis;
pub mod binding;
pub mod cli;
pub mod concealing;
pub mod grouprep;
pub mod protocol;
pub mod qalg;
