use super::matrix::DensityOperator;
use super::QalgError;

/// Rényi order supported by the analyses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Renyi {
    /// α = 1, von Neumann entropy.
    VonNeumann,
    /// α = 1/2.
    Half,
}

/// Entropy in bits.
pub fn entropy(rho: &DensityOperator, alpha: Renyi) -> Result<f64, QalgError> {
    Ok(spectrum_entropy(&rho.spectrum()?, alpha))
}

/// Entropy of a probability vector in bits, with `0·log 0 = 0`.
pub fn spectrum_entropy(probs: &[f64], alpha: Renyi) -> f64 {
    match alpha {
        Renyi::VonNeumann => -probs
            .iter()
            .filter(|&&p| p > 1e-300)
            .map(|&p| p * p.log2())
            .sum::<f64>(),
        Renyi::Half => 2.0 * probs.iter().map(|&p| p.max(0.0).sqrt()).sum::<f64>().log2(),
    }
}

/// Binary Shannon entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    spectrum_entropy(&[p, 1.0 - p], Renyi::VonNeumann)
}
