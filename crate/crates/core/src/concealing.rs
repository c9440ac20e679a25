//! Concealing analysis. For a covariant ensemble the accessible information
//! reduces to a maximization over one seed vector `φ`:
//!
//! `I_acc = log d + (d/|G|) Σ_g ⟨φ|ρ_g|φ⟩ log ⟨φ|ρ_g|φ⟩`, `ρ_g = D(g) ρ_0 D(g)†`.
//!
//! The value at a given `φ` equals the mutual information of the covariant
//! POVM `{(d/|G|) D(g)|φ⟩⟨φ|D(g)†}`, which [`mutual_info_povm`] computes
//! independently from the outcome distribution.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::grouprep::{
    orbit, tensor_power, GroupError, OrbitTable, ProjectiveRep, DEFAULT_GROUP_CAP,
};
use crate::protocol::QscProtocol;
use crate::qalg::{
    eig_hermitian, inner, ComplexMatrix, DensityOperator, QalgError, StateVector, C64,
};

pub const DEFAULT_RESTARTS: usize = 64;
/// Largest dimension accepted by direct maximization.
pub const DIRECT_DIM_CAP: usize = 16;

const COMPLETENESS_TOL: f64 = 1e-9;
const PSD_TOL: f64 = 1e-10;
const PROB_FLOOR: f64 = 1e-300;
const MAX_ASCENT_ITERS: usize = 20_000;
const MIN_STEP: f64 = 1e-10;
const REL_GAIN: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum ConcealingError {
    #[error("the covariant measurement needs an irreducible representation")]
    Reducible,
    #[error("vector dimension {found} does not match representation dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("POVM effects do not sum to the identity (defect {0:e})")]
    Incomplete(f64),
    #[error("POVM effect {index} is not positive semidefinite (min eigenvalue {min:e})")]
    NotPsd { index: usize, min: f64 },
    #[error("POVM needs at least one effect")]
    EmptyPovm,
    #[error("POVM has dimension {povm}, states have dimension {states}")]
    PovmDimension { povm: usize, states: usize },
    #[error("direct maximization too large: dimension {dim} exceeds {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("need at least one restart")]
    NoRestarts,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Qalg(#[from] QalgError),
}

/// Positive operator-valued measure.
#[derive(Clone, Debug)]
pub struct Povm {
    effects: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<ComplexMatrix>) -> Result<Self, ConcealingError> {
        let first = effects.first().ok_or(ConcealingError::EmptyPovm)?;
        let d = first.rows();
        let mut acc = ComplexMatrix::zeros(d, d);
        for (index, e) in effects.iter().enumerate() {
            if e.rows() != d || e.cols() != d {
                return Err(ConcealingError::PovmDimension {
                    povm: d,
                    states: e.rows(),
                });
            }
            let min = eig_hermitian(e)?.values.last().copied().unwrap_or(0.0);
            if min < -PSD_TOL {
                return Err(ConcealingError::NotPsd { index, min });
            }
            acc = &acc + e;
        }
        let defect = acc.max_abs_diff(&ComplexMatrix::identity(d));
        if defect > COMPLETENESS_TOL {
            return Err(ConcealingError::Incomplete(defect));
        }
        Ok(Self { effects })
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn dim(&self) -> usize {
        self.effects[0].rows()
    }
}

/// Max-norm of `Σ_g (d/|G|) D(g)|φ⟩⟨φ|D(g)† − I`.
pub fn covariant_povm_defect(rep: &ProjectiveRep, phi: &StateVector) -> f64 {
    let (_, defect) = covariant_effects(rep, phi);
    defect
}

fn covariant_effects(rep: &ProjectiveRep, phi: &StateVector) -> (Vec<ComplexMatrix>, f64) {
    let d = rep.dim();
    let w = C64::new(d as f64 / rep.order() as f64, 0.0);
    let effects: Vec<ComplexMatrix> = rep
        .elements()
        .iter()
        .map(|u| {
            let v = u.apply(phi.amplitudes());
            ComplexMatrix::outer(&v, &v).scale(w)
        })
        .collect();
    let mut acc = ComplexMatrix::zeros(d, d);
    for e in &effects {
        acc = &acc + e;
    }
    let defect = acc.max_abs_diff(&ComplexMatrix::identity(d));
    (effects, defect)
}

/// Effects `(d/|G|) D(g)|φ⟩⟨φ|D(g)†` in group-element order. Fails when they
/// do not resolve the identity, which flags a reducible representation.
pub fn covariant_povm(rep: &ProjectiveRep, phi: &StateVector) -> Result<Povm, ConcealingError> {
    if phi.dim() != rep.dim() {
        return Err(ConcealingError::DimensionMismatch {
            expected: rep.dim(),
            found: phi.dim(),
        });
    }
    let (effects, defect) = covariant_effects(rep, phi);
    if defect > COMPLETENESS_TOL {
        return Err(ConcealingError::Incomplete(defect));
    }
    Ok(Povm { effects })
}

fn plogp(p: f64) -> f64 {
    if p < PROB_FLOOR {
        0.0
    } else {
        p * p.log2()
    }
}

/// Classical mutual information in bits between a uniformly drawn state
/// index and the measurement outcome.
pub fn mutual_info_povm(states: &[DensityOperator], povm: &Povm) -> Result<f64, ConcealingError> {
    if states.is_empty() {
        return Ok(0.0);
    }
    if let Some(bad) = states.iter().find(|s| s.dim() != povm.dim()) {
        return Err(ConcealingError::PovmDimension {
            povm: povm.dim(),
            states: bad.dim(),
        });
    }
    let px = 1.0 / states.len() as f64;
    // joint[x][y] = p_x Tr(ρ_x M_y)
    let joint: Vec<Vec<f64>> = states
        .iter()
        .map(|rho| {
            povm.effects()
                .iter()
                .map(|m| px * trace_product(rho.matrix(), m).max(0.0))
                .collect()
        })
        .collect();
    let ny = povm.effects().len();
    let py: Vec<f64> = (0..ny)
        .map(|y| joint.iter().map(|row| row[y]).sum())
        .collect();
    let mut info = 0.0;
    for row in &joint {
        for (y, &pxy) in row.iter().enumerate() {
            if pxy >= PROB_FLOOR && py[y] >= PROB_FLOOR {
                info += pxy * (pxy / (px * py[y])).log2();
            }
        }
    }
    Ok(info)
}

/// `Re Tr(A B)`
fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let d = a.rows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc.re
}

/// Group-sum objective with the orbit multiplicities folded in.
struct DaviesObjective<'a> {
    dim: usize,
    /// `(state, weight)` with weight = d · (#g mapping ρ_0 to it) / |G|
    terms: Vec<(&'a DensityOperator, f64)>,
}

impl<'a> DaviesObjective<'a> {
    fn new(rep: &ProjectiveRep, orb: &'a OrbitTable) -> Self {
        let mut counts = vec![0usize; orb.len()];
        for g in 0..rep.order() {
            counts[orb.action(g, 0)] += 1;
        }
        let scale = rep.dim() as f64 / rep.order() as f64;
        let terms = orb
            .states()
            .iter()
            .zip(counts)
            .filter(|(_, c)| *c > 0)
            .map(|(s, c)| (s, scale * c as f64))
            .collect();
        Self {
            dim: rep.dim(),
            terms,
        }
    }

    fn value(&self, phi: &[C64]) -> f64 {
        (self.dim as f64).log2()
            + self
                .terms
                .iter()
                .map(|(rho, w)| w * plogp(rho.expectation(phi)))
                .sum::<f64>()
    }

    /// Euclidean gradient with respect to `φ̄` (times 2), i.e.
    /// `Σ w (log₂ p + 1/ln 2) · 2 ρ φ`.
    fn gradient(&self, phi: &[C64]) -> Vec<C64> {
        let mut g = vec![C64::new(0.0, 0.0); phi.len()];
        for (rho, w) in &self.terms {
            let rphi = rho.matrix().apply(phi);
            let p = inner(phi, &rphi).re.max(PROB_FLOOR);
            let coeff = 2.0 * w * (p.log2() + std::f64::consts::LOG2_E);
            for (gi, r) in g.iter_mut().zip(&rphi) {
                *gi += r * coeff;
            }
        }
        g
    }
}

fn check_inputs(rep: &ProjectiveRep, orb: &OrbitTable, dim: usize) -> Result<(), ConcealingError> {
    if dim != rep.dim() {
        return Err(ConcealingError::DimensionMismatch {
            expected: rep.dim(),
            found: dim,
        });
    }
    if orb.states()[0].dim() != rep.dim() {
        return Err(ConcealingError::DimensionMismatch {
            expected: rep.dim(),
            found: orb.states()[0].dim(),
        });
    }
    if !rep.is_irreducible() {
        return Err(ConcealingError::Reducible);
    }
    Ok(())
}

/// The group-sum expression at a given unit vector `φ` (not maximized).
pub fn davies_value(
    rep: &ProjectiveRep,
    orb: &OrbitTable,
    phi: &StateVector,
) -> Result<f64, ConcealingError> {
    check_inputs(rep, orb, phi.dim())?;
    Ok(DaviesObjective::new(rep, orb).value(phi.amplitudes()))
}

/// Result of maximizing the group-sum expression over `φ`.
#[derive(Clone, Debug)]
pub struct AccessibleInfo {
    pub i_acc_bits: f64,
    pub phi_star: StateVector,
    pub per_restart: Vec<f64>,
}

/// Geodesic gradient ascent with step halving from one start.
fn ascend(obj: &DaviesObjective<'_>, start: Vec<C64>) -> (f64, Vec<C64>) {
    let mut phi = start;
    let mut value = obj.value(&phi);
    let mut step = 0.5f64;
    let mut flat = 0;
    for _ in 0..MAX_ASCENT_ITERS {
        let g = obj.gradient(&phi);
        let along = inner(&phi, &g).re;
        let tangent: Vec<C64> = g.iter().zip(&phi).map(|(gi, p)| gi - p * along).collect();
        let tnorm = tangent.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        if tnorm < 1e-14 {
            break;
        }
        loop {
            let (s, c) = step.sin_cos();
            let trial: Vec<C64> = phi
                .iter()
                .zip(&tangent)
                .map(|(p, t)| p * c + t * (s / tnorm))
                .collect();
            let norm = trial.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
            let trial: Vec<C64> = trial.into_iter().map(|z| z / norm).collect();
            let tv = obj.value(&trial);
            if tv > value {
                let gain = tv - value;
                phi = trial;
                value = tv;
                step = (step * 1.5).min(1.0);
                flat = if gain <= REL_GAIN * value.abs().max(1e-300) {
                    flat + 1
                } else {
                    0
                };
                break;
            }
            step *= 0.5;
            if step < MIN_STEP {
                break;
            }
        }
        if step < MIN_STEP || flat >= 5 {
            break;
        }
    }
    (value, phi)
}

fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let n = v.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// Multi-start maximization of [`davies_value`]. Restart `i` starts from
/// ChaCha stream `i` of `seed`; the best value wins, ties to the lowest
/// restart index. `φ*` is returned with its first nonzero amplitude real
/// and nonnegative.
pub fn maximize_accessible_info(
    rep: &ProjectiveRep,
    orb: &OrbitTable,
    restarts: usize,
    seed: u64,
) -> Result<AccessibleInfo, ConcealingError> {
    if restarts == 0 {
        return Err(ConcealingError::NoRestarts);
    }
    check_inputs(rep, orb, rep.dim())?;
    if rep.dim() > DIRECT_DIM_CAP {
        return Err(ConcealingError::TooLarge {
            dim: rep.dim(),
            cap: DIRECT_DIM_CAP,
        });
    }
    let obj = DaviesObjective::new(rep, orb);
    let mut per_restart = Vec::with_capacity(restarts);
    let mut best: Option<(f64, Vec<C64>)> = None;
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let (value, phi) = ascend(&obj, random_unit(&mut rng, rep.dim()));
        per_restart.push(value);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, phi));
        }
    }
    let (i_acc_bits, phi) = best.expect("at least one restart");
    let phi_star = StateVector::normalized(phi)?.phase_fixed();
    Ok(AccessibleInfo {
        i_acc_bits,
        phi_star,
        per_restart,
    })
}

/// How the concealing bound for the full string was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConcealingMethod {
    /// `k ·` single-copy value.
    Additivity,
    /// Maximization on the k-fold tensor-power representation.
    Direct,
}

impl ConcealingMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ConcealingMethod::Additivity => "additivity",
            ConcealingMethod::Direct => "direct",
        }
    }
}

impl fmt::Display for ConcealingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct ConcealingReport {
    /// Maximized value on the representation that was optimized (single
    /// copy for additivity, all copies for direct).
    pub i_acc_bits: f64,
    pub phi_star: StateVector,
    pub b_bits: f64,
    pub method: ConcealingMethod,
}

pub fn concealing_bits(
    p: &QscProtocol,
    method: ConcealingMethod,
    restarts: usize,
    seed: u64,
) -> Result<ConcealingReport, ConcealingError> {
    match method {
        ConcealingMethod::Additivity => {
            let acc = maximize_accessible_info(p.rep(), p.orbit(), restarts, seed)?;
            Ok(ConcealingReport {
                b_bits: p.copies() as f64 * acc.i_acc_bits,
                i_acc_bits: acc.i_acc_bits,
                phi_star: acc.phi_star,
                method,
            })
        }
        ConcealingMethod::Direct => {
            let k = p.copies();
            let dim = p.dim();
            if dim > DIRECT_DIM_CAP {
                return Err(ConcealingError::TooLarge {
                    dim,
                    cap: DIRECT_DIM_CAP,
                });
            }
            let rep = tensor_power(p.rep(), k, DEFAULT_GROUP_CAP)?;
            let mut seed_state = p.copy_state(0).clone();
            for _ in 1..k {
                seed_state = seed_state.tensor(p.copy_state(0))?;
            }
            let orb = orbit(&rep, &seed_state)?;
            let acc = maximize_accessible_info(&rep, &orb, restarts, seed)?;
            Ok(ConcealingReport {
                b_bits: acc.i_acc_bits,
                i_acc_bits: acc.i_acc_bits,
                phi_star: acc.phi_star,
                method,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grouprep::{builtin_rep, BuiltinName};
    use crate::protocol::builtin_protocol;
    use crate::qalg::binary_entropy;

    fn fixture(name: BuiltinName) -> (ProjectiveRep, OrbitTable) {
        let b = builtin_rep(name).unwrap();
        let orb = orbit(&b.rep, &b.fiducial.density()).unwrap();
        (b.rep, orb)
    }

    #[test]
    fn tetrahedral_value_at_antipode() {
        let (rep, orb) = fixture(BuiltinName::Tetrahedral);
        let v = davies_value(&rep, &orb, &StateVector::basis(2, 1)).unwrap();
        // overlaps 0 (x3) and 2/3 (x9): 1 + (2/12)·9·(2/3)·log₂(2/3)
        let oracle = 1.0 + (2.0 / 12.0) * 9.0 * (2.0 / 3.0) * (2.0f64 / 3.0).log2();
        assert!((oracle - (4.0f64 / 3.0).log2()).abs() < 1e-15);
        assert!((v - oracle).abs() < 1e-10);
        assert!((v - 0.415037499278844).abs() < 1e-10);
    }

    #[test]
    fn tetrahedral_value_at_vertex() {
        let (rep, orb) = fixture(BuiltinName::Tetrahedral);
        let v = davies_value(&rep, &orb, &StateVector::basis(2, 0)).unwrap();
        // overlaps 1 (x3) and 1/3 (x9)
        let oracle = 1.0 + (2.0 / 12.0) * 9.0 * (1.0 / 3.0) * (1.0f64 / 3.0).log2();
        assert!((v - oracle).abs() < 1e-10);
        assert!((v - 0.207518749639422).abs() < 1e-10);
    }

    #[test]
    fn pauli_value_at_ket0() {
        let (rep, orb) = fixture(BuiltinName::Pauli2);
        let v = davies_value(&rep, &orb, &StateVector::basis(2, 0)).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn davies_refuses_reducible() {
        let b = builtin_rep(BuiltinName::ReducibleDemo).unwrap();
        let orb = orbit(&b.rep, &b.fiducial.density()).unwrap();
        assert!(matches!(
            davies_value(&b.rep, &orb, &StateVector::basis(4, 0)),
            Err(ConcealingError::Reducible)
        ));
    }

    #[test]
    fn maximization_fixtures() {
        let (rep, orb) = fixture(BuiltinName::Tetrahedral);
        let r = maximize_accessible_info(&rep, &orb, DEFAULT_RESTARTS, 1).unwrap();
        assert!((r.i_acc_bits - (4.0f64 / 3.0).log2()).abs() < 1e-4);

        let (rep, orb) = fixture(BuiltinName::Pauli2);
        let r = maximize_accessible_info(&rep, &orb, DEFAULT_RESTARTS, 1).unwrap();
        assert!((r.i_acc_bits - 1.0).abs() < 1e-6);

        let (rep, orb) = fixture(BuiltinName::Quaternion);
        let r = maximize_accessible_info(&rep, &orb, DEFAULT_RESTARTS, 1).unwrap();
        let want = 1.0 - binary_entropy(0.9);
        assert!((want - 0.531004406410719).abs() < 1e-12);
        assert!((r.i_acc_bits - want).abs() < 1e-4);
    }

    #[test]
    fn phi_star_gauge_is_fixed() {
        let (rep, orb) = fixture(BuiltinName::Tetrahedral);
        let r = maximize_accessible_info(&rep, &orb, 8, 3).unwrap();
        let first = r
            .phi_star
            .amplitudes()
            .iter()
            .find(|z| z.norm() > 1e-9)
            .unwrap();
        assert!(first.im.abs() < 1e-12 && first.re > 0.0);
    }

    #[test]
    fn pauli_covariant_povm() {
        let (rep, _) = fixture(BuiltinName::Pauli2);
        let povm = covariant_povm(&rep, &StateVector::basis(2, 0)).unwrap();
        assert_eq!(povm.effects().len(), 4);
        let p0 = ComplexMatrix::from_diag(&[C64::new(0.5, 0.), C64::new(0., 0.)]);
        let p1 = ComplexMatrix::from_diag(&[C64::new(0., 0.), C64::new(0.5, 0.)]);
        let n0 = povm
            .effects()
            .iter()
            .filter(|e| e.max_abs_diff(&p0) < 1e-12)
            .count();
        let n1 = povm
            .effects()
            .iter()
            .filter(|e| e.max_abs_diff(&p1) < 1e-12)
            .count();
        assert_eq!((n0, n1), (2, 2));
    }

    #[test]
    fn tetrahedral_covariant_povm_complete() {
        let (rep, _) = fixture(BuiltinName::Tetrahedral);
        let phi = StateVector::basis(2, 1);
        assert!(covariant_povm_defect(&rep, &phi) < 1e-12);
        assert_eq!(covariant_povm(&rep, &phi).unwrap().effects().len(), 12);
    }

    #[test]
    fn reducible_povm_incomplete() {
        let b = builtin_rep(BuiltinName::ReducibleDemo).unwrap();
        let err = covariant_povm(&b.rep, &StateVector::basis(4, 0)).unwrap_err();
        assert!(matches!(err, ConcealingError::Incomplete(d) if d > 0.1));
    }

    #[test]
    fn mutual_info_basics() {
        let states: Vec<DensityOperator> = (0..4)
            .map(|i| StateVector::basis(4, i).projector())
            .collect();
        let proj = Povm::new(
            (0..4)
                .map(|i| StateVector::basis(4, i).projector().matrix().clone())
                .collect(),
        )
        .unwrap();
        assert!((mutual_info_povm(&states, &proj).unwrap() - 2.0).abs() < 1e-12);
        let trivial = Povm::new(vec![ComplexMatrix::identity(4)]).unwrap();
        assert!(mutual_info_povm(&states, &trivial).unwrap().abs() < 1e-12);
    }

    #[test]
    fn tetrahedral_mutual_info_matches_group_sum() {
        let (rep, orb) = fixture(BuiltinName::Tetrahedral);
        let phi = StateVector::basis(2, 1);
        let povm = covariant_povm(&rep, &phi).unwrap();
        let mi = mutual_info_povm(orb.states(), &povm).unwrap();
        assert!((mi - (4.0f64 / 3.0).log2()).abs() < 1e-10);
        assert!((mi - davies_value(&rep, &orb, &phi).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn povm_validation() {
        let half = ComplexMatrix::identity(2).scale(C64::new(0.5, 0.));
        assert!(matches!(
            Povm::new(vec![half]),
            Err(ConcealingError::Incomplete(_))
        ));
        let neg = ComplexMatrix::from_diag(&[C64::new(1.5, 0.), C64::new(-0.5, 0.)]);
        let pos = ComplexMatrix::from_diag(&[C64::new(-0.5, 0.), C64::new(1.5, 0.)]);
        assert!(matches!(
            Povm::new(vec![neg, pos]),
            Err(ConcealingError::NotPsd { .. })
        ));
    }

    #[test]
    fn pauli_two_copies_both_paths() {
        let p = builtin_protocol(&builtin_rep(BuiltinName::Pauli2).unwrap(), None, 2).unwrap();
        let add = concealing_bits(&p, ConcealingMethod::Additivity, 16, 0).unwrap();
        let direct = concealing_bits(&p, ConcealingMethod::Direct, 16, 0).unwrap();
        assert!((add.b_bits - 2.0).abs() < 1e-6);
        assert!((direct.b_bits - 2.0).abs() < 1e-6);
        assert_eq!(direct.method, ConcealingMethod::Direct);
    }

    #[test]
    fn direct_mode_size_cap() {
        let p = builtin_protocol(&builtin_rep(BuiltinName::Pauli2).unwrap(), None, 5).unwrap();
        assert!(matches!(
            concealing_bits(&p, ConcealingMethod::Direct, 1, 0),
            Err(ConcealingError::TooLarge { .. })
        ));
    }
}
