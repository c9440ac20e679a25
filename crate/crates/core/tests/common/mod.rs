#![allow(dead_code)]

use qsc::grouprep::{builtin_rep, BuiltinName};
use qsc::protocol::{builtin_protocol, QscProtocol};
use qsc::qalg::{ComplexMatrix, DensityOperator, StateVector, C64};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const COVARIANT: [BuiltinName; 3] = [
    BuiltinName::Tetrahedral,
    BuiltinName::Pauli2,
    BuiltinName::Quaternion,
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn protocol(name: BuiltinName, copies: usize) -> QscProtocol {
    builtin_protocol(&builtin_rep(name).unwrap(), None, copies).unwrap()
}

pub fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| gaussian(rng)).collect();
    ComplexMatrix::new(rows, cols, data).unwrap()
}

pub fn random_state(rng: &mut impl Rng, dim: usize) -> StateVector {
    StateVector::normalized((0..dim).map(|_| gaussian(rng)).collect()).unwrap()
}

pub fn random_density(rng: &mut impl Rng, dim: usize) -> DensityOperator {
    let g = random_matrix(rng, dim, dim);
    let m = &g * &g.adjoint();
    let t = m.trace().re;
    DensityOperator::new(m.scale(C64::new(1.0 / t, 0.0))).unwrap()
}
