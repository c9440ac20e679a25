//! Group-covariant string commitment protocols: commitment states, honest
//! purifications, completeness, and conversion of randomized-unitary
//! (LOCKCOM-style) schemes into purified state families.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::grouprep::{orbit, Builtin, GroupError, OrbitTable, ProjectiveRep};
use crate::qalg::{
    eig_hermitian, reduced_state, ComplexMatrix, DensityOperator, Keep, QalgError, StateVector, C64,
};

const LABEL_TOL: f64 = 1e-8;
const PURIFICATION_TOL: f64 = 1e-9;
const RANK_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error(
        "not a group covariant protocol: the representation is reducible (irreducibility required)"
    )]
    Reducible,
    #[error("cannot label with bit strings: orbit size {0} is not a power of two")]
    OrbitSize(usize),
    #[error("copies must be at least 1")]
    ZeroCopies,
    #[error("bit string has length {found}, protocol commits to {expected} bits")]
    WrongLength { expected: usize, found: usize },
    #[error("invalid bit string `{0}`")]
    BadBits(String),
    #[error("reference labeling does not match the orbit: {0}")]
    LabelMismatch(String),
    #[error("purification check failed (defect {0:e})")]
    Purification(f64),
    #[error("lockcom spec needs at least one unitary")]
    NoUnitaries,
    #[error("lockcom unitary {index} is not a unitary on dimension {dim}")]
    BadUnitary { index: usize, dim: usize },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Qalg(#[from] QalgError),
}

/// An n-bit string, most significant bit first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// `value` written with `len` bits.
    pub fn from_index(value: usize, len: usize) -> Self {
        Self((0..len).rev().map(|k| (value >> k) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn to_index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
    }

    /// All strings of length `len` in numeric order.
    pub fn all(len: usize) -> impl Iterator<Item = BitString> {
        (0..1usize << len).map(move |v| BitString::from_index(v, len))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(ProtocolError::BadBits(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}

/// Bipartite pure state on `H_A ⊗ H_B` with `dim_a · dim_b` amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct Purification {
    pub state: StateVector,
    pub dim_a: usize,
}

impl Purification {
    pub fn dim_b(&self) -> usize {
        self.state.dim() / self.dim_a
    }

    /// `Tr_A |ψ⟩⟨ψ|`
    pub fn reduced(&self) -> DensityOperator {
        reduced_state(&self.state, self.dim_a, self.dim_b(), Keep::B)
            .expect("purification dimensions are consistent")
    }
}

/// Minimal purification `Σ_a √λ_a |a⟩_A ⊗ |u_a⟩_B` with `dim_a = rank(ρ)`.
pub fn purify(rho: &DensityOperator) -> Result<Purification, QalgError> {
    let eig = eig_hermitian(rho.matrix())?;
    let d = rho.dim();
    let rank = eig.values.iter().filter(|&&l| l > RANK_TOL).count().max(1);
    let mut amps = Vec::with_capacity(rank * d);
    for (l, u) in eig.values.iter().zip(&eig.vectors).take(rank) {
        let s = l.max(0.0).sqrt();
        amps.extend(u.amplitudes().iter().map(|z| z * s));
    }
    Ok(Purification {
        state: StateVector::normalized(amps)?,
        dim_a: rank,
    })
}

/// Joins per-copy purifications on `A_j ⊗ B_j` into one on
/// `(A_1 ⊗ ⋯ ⊗ A_k) ⊗ (B_1 ⊗ ⋯ ⊗ B_k)`.
pub fn join_purifications(parts: &[&Purification]) -> Purification {
    let dims_a: Vec<usize> = parts.iter().map(|p| p.dim_a).collect();
    let dims_b: Vec<usize> = parts.iter().map(|p| p.dim_b()).collect();
    let total_a: usize = dims_a.iter().product();
    let total_b: usize = dims_b.iter().product();
    let mut amps = vec![C64::new(0.0, 0.0); total_a * total_b];
    for ia in 0..total_a {
        let digits_a = mixed_radix(ia, &dims_a);
        for ib in 0..total_b {
            let digits_b = mixed_radix(ib, &dims_b);
            amps[ia * total_b + ib] = parts
                .iter()
                .enumerate()
                .map(|(j, p)| p.state.amplitudes()[digits_a[j] * dims_b[j] + digits_b[j]])
                .product();
        }
    }
    Purification {
        state: StateVector::normalized(amps).expect("product of unit vectors"),
        dim_a: total_a,
    }
}

fn mixed_radix(mut idx: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = idx % r;
        idx /= r;
    }
    out
}

/// A group-covariant string commitment protocol.
#[derive(Clone, Debug)]
pub struct QscProtocol {
    rep: ProjectiveRep,
    orbit: OrbitTable,
    copies: usize,
    bits_per_copy: usize,
    /// label value → orbit index
    label_map: Vec<usize>,
    purifications: Vec<Purification>,
}

/// Builds a protocol with discovery-order labels (fiducial ↦ 0…0).
pub fn build_protocol(
    rep: &ProjectiveRep,
    fiducial: &DensityOperator,
    copies: usize,
) -> Result<QscProtocol, ProtocolError> {
    build_protocol_labeled(rep, fiducial, copies, None)
}

/// Builds a protocol; `labeled_states[v]` pins the orbit state carrying
/// label value `v` when given.
pub fn build_protocol_labeled(
    rep: &ProjectiveRep,
    fiducial: &DensityOperator,
    copies: usize,
    labeled_states: Option<&[DensityOperator]>,
) -> Result<QscProtocol, ProtocolError> {
    if copies == 0 {
        return Err(ProtocolError::ZeroCopies);
    }
    if !rep.is_irreducible() {
        return Err(ProtocolError::Reducible);
    }
    let orb = orbit(rep, fiducial)?;
    let size = orb.len();
    if !size.is_power_of_two() {
        return Err(ProtocolError::OrbitSize(size));
    }
    let bits_per_copy = size.trailing_zeros() as usize;

    let label_map = match labeled_states {
        None => (0..size).collect(),
        Some(refs) => {
            if refs.len() != size {
                return Err(ProtocolError::LabelMismatch(format!(
                    "{} reference states for an orbit of {size}",
                    refs.len()
                )));
            }
            let mut map = Vec::with_capacity(size);
            for (v, r) in refs.iter().enumerate() {
                let idx = orb
                    .states()
                    .iter()
                    .position(|s| s.distance(r) <= LABEL_TOL)
                    .ok_or_else(|| {
                        ProtocolError::LabelMismatch(format!("label {v} not found in orbit"))
                    })?;
                if map.contains(&idx) {
                    return Err(ProtocolError::LabelMismatch(format!(
                        "label {v} duplicates an earlier label"
                    )));
                }
                map.push(idx);
            }
            map
        }
    };

    let purifications = orb
        .states()
        .iter()
        .map(|rho| {
            let p = purify(rho)?;
            let defect = p.reduced().distance(rho);
            if defect > PURIFICATION_TOL {
                return Err(ProtocolError::Purification(defect));
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>, ProtocolError>>()?;

    Ok(QscProtocol {
        rep: rep.clone(),
        orbit: orb,
        copies,
        bits_per_copy,
        label_map,
        purifications,
    })
}

/// Protocol from a builtin, optionally overriding its fiducial.
pub fn builtin_protocol(
    builtin: &Builtin,
    fiducial: Option<&DensityOperator>,
    copies: usize,
) -> Result<QscProtocol, ProtocolError> {
    match fiducial {
        Some(rho) => build_protocol(&builtin.rep, rho, copies),
        None => build_protocol_labeled(
            &builtin.rep,
            &builtin.fiducial.density(),
            copies,
            builtin.labeled_states.as_deref(),
        ),
    }
}

impl QscProtocol {
    pub fn rep(&self) -> &ProjectiveRep {
        &self.rep
    }

    pub fn orbit(&self) -> &OrbitTable {
        &self.orbit
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn bits_per_copy(&self) -> usize {
        self.bits_per_copy
    }

    /// Committed string length.
    pub fn n(&self) -> usize {
        self.copies * self.bits_per_copy
    }

    /// Per-copy dimension.
    pub fn copy_dim(&self) -> usize {
        self.rep.dim()
    }

    /// Dimension of Bob's full commitment register.
    pub fn dim(&self) -> usize {
        self.rep.dim().pow(self.copies as u32)
    }

    pub fn num_strings(&self) -> usize {
        1 << self.n()
    }

    /// Honest prior, uniform over strings.
    pub fn prior(&self) -> f64 {
        1.0 / self.num_strings() as f64
    }

    /// Orbit index carrying per-copy label value `v`.
    pub fn orbit_index(&self, label: usize) -> usize {
        self.label_map[label]
    }

    /// Per-copy state for label value `v`.
    pub fn copy_state(&self, label: usize) -> &DensityOperator {
        &self.orbit.states()[self.label_map[label]]
    }

    pub fn copy_purification(&self, label: usize) -> &Purification {
        &self.purifications[self.label_map[label]]
    }

    /// The same protocol with a single copy.
    pub fn single_copy(&self) -> QscProtocol {
        QscProtocol {
            copies: 1,
            ..self.clone()
        }
    }

    fn check_len(&self, x: &BitString) -> Result<(), ProtocolError> {
        if x.len() != self.n() {
            return Err(ProtocolError::WrongLength {
                expected: self.n(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Per-copy label values of `x`.
    pub fn copy_labels(&self, x: &BitString) -> Result<Vec<usize>, ProtocolError> {
        self.check_len(x)?;
        let m = self.bits_per_copy;
        Ok((0..self.copies)
            .map(|j| {
                x.bits()[j * m..(j + 1) * m]
                    .iter()
                    .fold(0, |acc, &b| (acc << 1) | usize::from(b))
            })
            .collect())
    }

    /// Bob's state `ρ_x` after the commit phase.
    pub fn commitment_state(&self, x: &BitString) -> Result<DensityOperator, ProtocolError> {
        let labels = self.copy_labels(x)?;
        let mut rho = self.copy_state(labels[0]).clone();
        for &v in &labels[1..] {
            rho = rho.tensor(self.copy_state(v))?;
        }
        Ok(rho)
    }

    /// Honest `|ψ_x⟩` on `H_A ⊗ H_B`.
    pub fn purification(&self, x: &BitString) -> Result<Purification, ProtocolError> {
        let labels = self.copy_labels(x)?;
        let parts: Vec<&Purification> = labels.iter().map(|&v| self.copy_purification(v)).collect();
        Ok(join_purifications(&parts))
    }

    /// Commit the B half, reveal the A half, and run Bob's projective test
    /// onto `|ψ_x⟩`. Returns the acceptance probability.
    pub fn honest_run(&self, x: &BitString) -> Result<f64, ProtocolError> {
        let psi = self.purification(x)?;
        // Bob's register after commit must be ρ_x; after reveal he holds ψ_x.
        let bob_view = psi.reduced();
        let defect = bob_view.distance(&self.commitment_state(x)?);
        if defect > PURIFICATION_TOL {
            return Err(ProtocolError::Purification(defect));
        }
        let received = psi.state.clone();
        Ok(psi.state.inner(&received).norm_sqr())
    }

    /// Worst `‖D(g) ρ_s D(g)† − ρ_{g·s}‖_max` over the per-copy orbit.
    pub fn covariance_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (g, u) in self.rep.elements().iter().enumerate() {
            for (s, rho) in self.orbit.states().iter().enumerate() {
                let img = rho.conjugate_by(u);
                let target = &self.orbit.states()[self.orbit.action(g, s)];
                worst = worst.max(img.distance(target));
            }
        }
        worst
    }
}

/// A commitment scheme that applies one of `R` unitaries uniformly at random
/// to `|x⟩`.
#[derive(Clone, Debug)]
pub struct LockcomSpec {
    n: usize,
    unitaries: Vec<ComplexMatrix>,
}

impl LockcomSpec {
    pub fn new(n: usize, unitaries: Vec<ComplexMatrix>) -> Result<Self, ProtocolError> {
        if unitaries.is_empty() {
            return Err(ProtocolError::NoUnitaries);
        }
        let dim = 1usize << n;
        for (index, u) in unitaries.iter().enumerate() {
            if u.rows() != dim || u.cols() != dim || u.unitarity_defect() > UNITARY_TOL {
                return Err(ProtocolError::BadUnitary { index, dim });
            }
        }
        Ok(Self { n, unitaries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }
}

/// `|ψ_x⟩ = (1/√R) Σ_i |i⟩_A ⊗ U_i|x⟩_B` for every `x`, indexed by the
/// numeric value of `x`.
pub fn from_lockcom(spec: &LockcomSpec) -> Vec<Purification> {
    let dim = 1usize << spec.n;
    let r = spec.unitaries.len();
    let norm = 1.0 / (r as f64).sqrt();
    (0..dim)
        .map(|x| {
            let amps: Vec<C64> = spec
                .unitaries
                .iter()
                .flat_map(|u| u.column(x).into_iter().map(|z| z * norm))
                .collect();
            Purification {
                state: StateVector::normalized(amps).expect("columns of unitaries"),
                dim_a: r,
            }
        })
        .collect()
}
