//! Full protocol report: binding and concealing bounds, the margin
//! `n − (a + b)`, and the pure-state dichotomy between protocols that are
//! classical in disguise (orthogonal commitment states, zero margin) and
//! nontrivial ones (positive margin).

use std::fmt;

use thiserror::Error;

use crate::binding::{binding_report, evaluate_strategy, me_attack, strategy_search, BindingError};
use crate::concealing::{concealing_bits, ConcealingError, ConcealingMethod, DEFAULT_RESTARTS};
use crate::protocol::{BitString, ProtocolError, QscProtocol};
use crate::qalg::{DensityOperator, QalgError};

const PURE_TOL: f64 = 1e-9;
const ORTHO_TOL: f64 = 1e-9;
const CLASSICAL_MARGIN_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("orthogonality dichotomy applies to pure ρ_x only")]
    MixedState,
    #[error("dichotomy violated: {0}")]
    Dichotomy(String),
    #[error(transparent)]
    Binding(#[from] BindingError),
    #[error(transparent)]
    Concealing(#[from] ConcealingError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Qalg(#[from] QalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    ClassicalEquivalent,
    Nontrivial,
    MixedStateUnclassified,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::ClassicalEquivalent => "classical_equivalent",
            Classification::Nontrivial => "nontrivial",
            Classification::MixedStateUnclassified => "mixed_state_unclassified",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// True iff every pair of (pure) states has squared overlap ≤ 1e-9.
pub fn orthogonality_check(states: &[DensityOperator]) -> Result<bool, AnalysisError> {
    for s in states {
        if !s.is_pure(PURE_TOL)? {
            return Err(AnalysisError::MixedState);
        }
    }
    for (i, a) in states.iter().enumerate() {
        for b in &states[i + 1..] {
            // Tr(ρσ) = |⟨ψ|φ⟩|² for pure states
            let m = a.matrix();
            let n = b.matrix();
            let d = m.rows();
            let overlap: f64 = (0..d)
                .flat_map(|r| (0..d).map(move |c| (r, c)))
                .map(|(r, c)| (m[(r, c)] * n[(c, r)]).re)
                .sum();
            if overlap > ORTHO_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug)]
pub struct AnalysisOptions {
    pub concealing: ConcealingMethod,
    pub restarts: usize,
    /// Restart count for the numerical adversary; `None` skips it.
    pub search_restarts: Option<usize>,
    pub seed: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            concealing: ConcealingMethod::Additivity,
            restarts: DEFAULT_RESTARTS,
            search_restarts: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProtocolReport {
    pub n: usize,
    pub d: usize,
    pub group_order: usize,
    pub eigenvalues: Vec<f64>,
    pub sum_bound: f64,
    pub a_bits: f64,
    pub renyi_a_bits: f64,
    pub attack_sum: f64,
    pub search_best_sum: Option<f64>,
    pub i_acc_bits: f64,
    pub b_bits: f64,
    pub concealing_method: ConcealingMethod,
    pub classification: Classification,
    pub margin: f64,
    pub seed: u64,
}

/// Runs binding, the saturating attack and concealing, then classifies.
/// The margin always uses the analytic `a`, never the search result.
pub fn classify(p: &QscProtocol, opts: &AnalysisOptions) -> Result<ProtocolReport, AnalysisError> {
    let binding = binding_report(p)?;
    let concealing = concealing_bits(p, opts.concealing, opts.restarts, opts.seed)?;
    let search_best_sum = match opts.search_restarts {
        Some(r) => Some(strategy_search(p, r, opts.seed)?.best_sum),
        None => None,
    };
    let margin = p.n() as f64 - (binding.a_bits + concealing.b_bits);

    let states = p.orbit().states();
    let pure = states
        .iter()
        .map(|s| s.is_pure(PURE_TOL))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .all(|b| b);
    let classification = if !pure {
        Classification::MixedStateUnclassified
    } else if orthogonality_check(states)? {
        if margin.abs() > CLASSICAL_MARGIN_TOL {
            return Err(AnalysisError::Dichotomy(format!(
                "orthogonal commitment states but margin {margin:e}"
            )));
        }
        Classification::ClassicalEquivalent
    } else {
        if margin <= 0.0 {
            return Err(AnalysisError::Dichotomy(format!(
                "non-orthogonal commitment states but margin {margin:e}"
            )));
        }
        Classification::Nontrivial
    };

    Ok(ProtocolReport {
        n: p.n(),
        d: p.dim(),
        group_order: p.rep().order(),
        eigenvalues: binding.eigenvalues,
        sum_bound: binding.sum_bound,
        a_bits: binding.a_bits,
        renyi_a_bits: binding.renyi_a_bits,
        attack_sum: binding.attack_sum,
        search_best_sum,
        i_acc_bits: concealing.i_acc_bits,
        b_bits: concealing.b_bits,
        concealing_method: concealing.method,
        classification,
        margin,
        seed: opts.seed,
    })
}

/// Per-string outcome of the maximally-entangled attack.
#[derive(Clone, Debug)]
pub struct AttackTrace {
    pub per_x: Vec<(BitString, f64)>,
    pub sum: f64,
    pub bound: f64,
    /// Max-norm distance of Bob's committed state from `I/d`.
    pub reduced_distance: f64,
}

pub fn attack_trace(p: &QscProtocol) -> Result<AttackTrace, AnalysisError> {
    let bound = crate::binding::binding_bound(p)?.sum_bound;
    let strategy = me_attack(p)?;
    let outcome = evaluate_strategy(p, &strategy)?;
    let reduced_distance = strategy
        .bob_state()
        .distance(&DensityOperator::maximally_mixed(p.dim()));
    Ok(AttackTrace {
        per_x: BitString::all(p.n()).zip(outcome.per_x).collect(),
        sum: outcome.sum,
        bound,
        reduced_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grouprep::{builtin_rep, BuiltinName};
    use crate::protocol::builtin_protocol;
    use crate::qalg::{binary_entropy, StateVector};

    fn proto(name: BuiltinName, copies: usize) -> QscProtocol {
        builtin_protocol(&builtin_rep(name).unwrap(), None, copies).unwrap()
    }

    #[test]
    fn orthogonality_examples() {
        let p = proto(BuiltinName::Pauli2, 1);
        assert!(orthogonality_check(p.orbit().states()).unwrap());
        let t = proto(BuiltinName::Tetrahedral, 1);
        assert!(!orthogonality_check(t.orbit().states()).unwrap());
        assert!(orthogonality_check(&[StateVector::basis(3, 2).projector()]).unwrap());
    }

    #[test]
    fn orthogonality_rejects_mixed() {
        let q = proto(BuiltinName::Quaternion, 1);
        let err = orthogonality_check(q.orbit().states()).unwrap_err();
        assert!(err.to_string().contains("pure ρ_x only"));
    }

    #[test]
    fn tetrahedral_is_nontrivial() {
        let r = classify(
            &proto(BuiltinName::Tetrahedral, 1),
            &AnalysisOptions::default(),
        )
        .unwrap();
        assert_eq!(r.classification, Classification::Nontrivial);
        assert_eq!((r.n, r.d, r.group_order), (2, 2, 12));
        assert!((r.a_bits - 1.0).abs() < 1e-9);
        assert!((r.b_bits - (4.0f64 / 3.0).log2()).abs() < 1e-4);
        assert!((r.margin - 0.584962500721156).abs() < 1e-3);
    }

    #[test]
    fn pauli_is_classical_equivalent() {
        let r = classify(&proto(BuiltinName::Pauli2, 1), &AnalysisOptions::default()).unwrap();
        assert_eq!(r.classification, Classification::ClassicalEquivalent);
        assert!(r.a_bits.abs() < 1e-9);
        assert!((r.b_bits - 1.0).abs() < 1e-6);
        assert!(r.margin.abs() < 1e-6);
    }

    #[test]
    fn mixed_fixture_reports_negative_margin() {
        let r = classify(
            &proto(BuiltinName::Quaternion, 1),
            &AnalysisOptions::default(),
        )
        .unwrap();
        assert_eq!(r.classification, Classification::MixedStateUnclassified);
        let a = 1.6f64.log2();
        let b = 1.0 - binary_entropy(0.9);
        assert!((r.a_bits - a).abs() < 1e-9);
        assert!((r.b_bits - b).abs() < 1e-4);
        assert!((r.margin - (1.0 - a - b)).abs() < 1e-4);
        assert!((r.margin + 0.209076).abs() < 1e-4);
    }

    #[test]
    fn search_is_optional() {
        let opts = AnalysisOptions {
            search_restarts: Some(5),
            ..AnalysisOptions::default()
        };
        let r = classify(&proto(BuiltinName::Pauli2, 1), &opts).unwrap();
        let best = r.search_best_sum.unwrap();
        assert!(best <= 1.0 + 1e-9 && best > 0.99);
    }

    #[test]
    fn attack_trace_tetrahedral() {
        let t = attack_trace(&proto(BuiltinName::Tetrahedral, 1)).unwrap();
        assert_eq!(t.per_x.len(), 4);
        assert!(t.per_x.iter().all(|(_, v)| (v - 0.5).abs() < 1e-9));
        assert!((t.sum - 2.0).abs() < 1e-9 && (t.bound - 2.0).abs() < 1e-9);
        assert!(t.reduced_distance < 1e-12);
    }
}
