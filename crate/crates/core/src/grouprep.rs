//! Finite projective unitary groups: closure from generators, consistency and
//! irreducibility checks, tensor powers, orbits of density operators, and the
//! builtin fixtures.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;

use crate::qalg::{tensor, ComplexMatrix, DensityOperator, QalgError, StateVector, C64};

/// Default cap on group order for closure and tensor powers.
pub const DEFAULT_GROUP_CAP: usize = 10_000;

const UNITARY_TOL: f64 = 1e-10;
const DEDUP_TOL: f64 = 1e-8;
const PRODUCT_TOL: f64 = 1e-9;
const TWIRL_TOL: f64 = 1e-9;
const FINGERPRINT_BIN: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("no generators given")]
    NoGenerators,
    #[error("generator {index} is {rows}x{cols}, expected {dim}x{dim}")]
    GeneratorShape {
        index: usize,
        rows: usize,
        cols: usize,
        dim: usize,
    },
    #[error("generator {index} is not unitary (defect {defect:e})")]
    NotUnitary { index: usize, defect: f64 },
    #[error("group too large or not finite: closure exceeded {cap} elements")]
    TooLarge { cap: usize },
    #[error(
        "tensor power too large: order {order}^{k} exceeds cap {cap}; use the additivity path for concealing"
    )]
    PowerTooLarge { order: usize, k: usize, cap: usize },
    #[error("tensor power requires k >= 1")]
    ZeroPower,
    #[error("product closure lost: element product not found in the group")]
    NotClosed,
    #[error("state dimension {found} does not match representation dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown builtin representation `{0}`")]
    UnknownBuiltin(String),
    #[error("builtin `{0}` failed its self-check: {1}")]
    FixtureMismatch(&'static str, String),
    #[error(transparent)]
    Qalg(#[from] QalgError),
}

/// Finite group of unitaries modulo global phase.
#[derive(Clone)]
pub struct ProjectiveRep {
    dim: usize,
    elements: Vec<ComplexMatrix>,
    mult: Vec<usize>,
    inverse: Vec<usize>,
    irreducible: OnceLock<bool>,
}

impl fmt::Debug for ProjectiveRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProjectiveRep")
            .field("dim", &self.dim)
            .field("order", &self.order())
            .finish()
    }
}

impl ProjectiveRep {
    /// Assembles a representation from explicit tables without checking
    /// them. Use [`is_projective_rep`] to validate.
    pub fn from_parts(
        dim: usize,
        elements: Vec<ComplexMatrix>,
        mult_table: Vec<usize>,
        inverse_table: Vec<usize>,
    ) -> Self {
        let n = elements.len();
        assert_eq!(mult_table.len(), n * n, "mult table must be |G|x|G|");
        assert_eq!(
            inverse_table.len(),
            n,
            "inverse table must have |G| entries"
        );
        Self {
            dim,
            elements,
            mult: mult_table,
            inverse: inverse_table,
            irreducible: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn element(&self, g: usize) -> &ComplexMatrix {
        &self.elements[g]
    }

    /// Index of `gh`.
    pub fn mult(&self, g: usize, h: usize) -> usize {
        self.mult[g * self.order() + h]
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverse[g]
    }

    /// Cached Schur twirl irreducibility test.
    pub fn is_irreducible(&self) -> bool {
        *self.irreducible.get_or_init(|| is_irreducible(self))
    }

    /// Block-diagonal `g ↦ D(g) ⊕ D(g)`; always reducible.
    pub fn doubled(&self) -> Self {
        let elements = self.elements.iter().map(|u| u.direct_sum(u)).collect();
        Self::from_parts(
            self.dim * 2,
            elements,
            self.mult.clone(),
            self.inverse.clone(),
        )
    }
}

/// Phase-invariant lookup of group elements.
struct ElementIndex {
    weights: Vec<f64>,
    bins: HashMap<i64, Vec<usize>>,
}

impl ElementIndex {
    fn new(dim: usize) -> Self {
        let weights = (0..dim * dim)
            .map(|k| 1.0 + (k as f64 * 0.618_033_988_749_895).fract())
            .collect();
        Self {
            weights,
            bins: HashMap::new(),
        }
    }

    fn key(&self, m: &ComplexMatrix) -> i64 {
        let fp: f64 = m
            .data()
            .iter()
            .zip(&self.weights)
            .map(|(z, w)| z.norm() * w)
            .sum();
        (fp / FINGERPRINT_BIN).round() as i64
    }

    fn find(&self, elements: &[ComplexMatrix], m: &ComplexMatrix) -> Option<usize> {
        let key = self.key(m);
        (key - 1..=key + 1)
            .filter_map(|k| self.bins.get(&k))
            .flatten()
            .copied()
            .filter(|&i| elements[i].phase_aligned_diff(m) <= DEDUP_TOL)
            .min()
    }

    fn insert(&mut self, m: &ComplexMatrix, index: usize) {
        let key = self.key(m);
        self.bins.entry(key).or_default().push(index);
    }
}

/// Smallest phase-deduplicated set containing the identity and the
/// generators that is closed under multiplication. Elements are ordered
/// breadth-first from the identity, left-multiplying by the generators in
/// the order given.
pub fn close_group(generators: &[ComplexMatrix], cap: usize) -> Result<ProjectiveRep, GroupError> {
    let first = generators.first().ok_or(GroupError::NoGenerators)?;
    let dim = first.rows();
    for (index, g) in generators.iter().enumerate() {
        if g.rows() != dim || g.cols() != dim {
            return Err(GroupError::GeneratorShape {
                index,
                rows: g.rows(),
                cols: g.cols(),
                dim,
            });
        }
        let defect = g.unitarity_defect();
        if defect > UNITARY_TOL {
            return Err(GroupError::NotUnitary { index, defect });
        }
    }

    let mut elements = vec![ComplexMatrix::identity(dim)];
    let mut index = ElementIndex::new(dim);
    index.insert(&elements[0], 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(e) = queue.pop_front() {
        for g in generators {
            let cand = g * &elements[e];
            if index.find(&elements, &cand).is_none() {
                if elements.len() >= cap {
                    return Err(GroupError::TooLarge { cap });
                }
                index.insert(&cand, elements.len());
                queue.push_back(elements.len());
                elements.push(cand);
            }
        }
    }

    let n = elements.len();
    let mut mult = Vec::with_capacity(n * n);
    for g in 0..n {
        for h in 0..n {
            let prod = &elements[g] * &elements[h];
            mult.push(index.find(&elements, &prod).ok_or(GroupError::NotClosed)?);
        }
    }
    let inverse = (0..n)
        .map(|g| {
            index
                .find(&elements, &elements[g].adjoint())
                .ok_or(GroupError::NotClosed)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProjectiveRep::from_parts(dim, elements, mult, inverse))
}

/// Outcome of [`is_projective_rep`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RepCheck {
    pub ok: bool,
    pub max_defect: f64,
}

/// Checks `D(g)D(h) ∝ D(gh)`, `D(g)D(g⁻¹) ∝ I`, unitarity and the identity at
/// index 0, reporting the worst phase-aligned defect.
pub fn is_projective_rep(rep: &ProjectiveRep) -> RepCheck {
    let n = rep.order();
    let id = ComplexMatrix::identity(rep.dim());
    let mut worst = rep.element(0).phase_aligned_diff(&id);
    for u in rep.elements() {
        worst = worst.max(u.unitarity_defect());
    }
    for g in 0..n {
        for h in 0..n {
            let gh = rep.mult(g, h);
            let prod = rep.element(g) * rep.element(h);
            let defect = if gh < n {
                prod.phase_aligned_diff(rep.element(gh))
            } else {
                f64::INFINITY
            };
            worst = worst.max(defect);
        }
        let inv = rep.inverse(g);
        let defect = if inv < n {
            (rep.element(g) * rep.element(inv)).phase_aligned_diff(&id)
        } else {
            f64::INFINITY
        };
        worst = worst.max(defect);
    }
    RepCheck {
        ok: worst <= PRODUCT_TOL,
        max_defect: worst,
    }
}

/// `(1/|G|) Σ_g D(g) M D(g)†`
pub fn twirl(rep: &ProjectiveRep, m: &ComplexMatrix) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(rep.dim(), rep.dim());
    for u in rep.elements() {
        acc = &acc + &m.conjugate_by(u);
    }
    acc.scale(C64::new(1.0 / rep.order() as f64, 0.0))
}

/// Schur test: the twirl of every matrix unit `E_ij` must equal
/// `δ_ij / d · I`.
pub fn is_irreducible(rep: &ProjectiveRep) -> bool {
    let d = rep.dim();
    let inv_order = 1.0 / rep.order() as f64;
    // T(E_ij)[k, l] = (1/|G|) Σ_g D(g)[k, i] · conj(D(g)[l, j])
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let val: C64 = rep
                        .elements()
                        .iter()
                        .map(|u| u[(k, i)] * u[(l, j)].conj())
                        .sum::<C64>()
                        * inv_order;
                    let want = if i == j && k == l {
                        1.0 / d as f64
                    } else {
                        0.0
                    };
                    if (val - C64::new(want, 0.0)).norm() > TWIRL_TOL {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// `(g_1, …, g_k) ↦ D(g_1) ⊗ ⋯ ⊗ D(g_k)` with lexicographic element order.
pub fn tensor_power(
    rep: &ProjectiveRep,
    k: usize,
    cap: usize,
) -> Result<ProjectiveRep, GroupError> {
    if k == 0 {
        return Err(GroupError::ZeroPower);
    }
    if k == 1 {
        return Ok(rep.clone());
    }
    let n = rep.order();
    let order = u32::try_from(k)
        .ok()
        .and_then(|k32| n.checked_pow(k32))
        .filter(|&o| o <= cap)
        .ok_or(GroupError::PowerTooLarge { order: n, k, cap })?;
    let digits = |mut idx: usize| -> Vec<usize> {
        let mut out = vec![0; k];
        for slot in out.iter_mut().rev() {
            *slot = idx % n;
            idx /= n;
        }
        out
    };
    let compose = |ds: &[usize]| ds.iter().fold(0, |acc, &g| acc * n + g);

    let mut elements = Vec::with_capacity(order);
    for idx in 0..order {
        let ds = digits(idx);
        let mut m = rep.element(ds[0]).clone();
        for &g in &ds[1..] {
            m = tensor(&m, rep.element(g))?;
        }
        elements.push(m);
    }
    let mut mult = Vec::with_capacity(order * order);
    for a in 0..order {
        let da = digits(a);
        for b in 0..order {
            let db = digits(b);
            let prod: Vec<usize> = da.iter().zip(&db).map(|(&g, &h)| rep.mult(g, h)).collect();
            mult.push(compose(&prod));
        }
    }
    let inverse = (0..order)
        .map(|a| {
            let inv: Vec<usize> = digits(a).iter().map(|&g| rep.inverse(g)).collect();
            compose(&inv)
        })
        .collect();
    Ok(ProjectiveRep::from_parts(
        rep.dim().pow(k as u32),
        elements,
        mult,
        inverse,
    ))
}

/// Orbit of a density operator with the induced permutation action.
#[derive(Clone, Debug)]
pub struct OrbitTable {
    states: Vec<DensityOperator>,
    action: Vec<usize>,
    transitive: bool,
    stabilizer_order: usize,
}

impl OrbitTable {
    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Index of `D(g) ρ_s D(g)†`.
    pub fn action(&self, g: usize, s: usize) -> usize {
        self.action[g * self.states.len() + s]
    }

    pub fn transitive(&self) -> bool {
        self.transitive
    }

    pub fn stabilizer_order(&self) -> usize {
        self.stabilizer_order
    }
}

/// Breadth-first orbit of `rho0` under `rep`, deduplicated at max-norm 1e-8.
pub fn orbit(rep: &ProjectiveRep, rho0: &DensityOperator) -> Result<OrbitTable, GroupError> {
    if rho0.dim() != rep.dim() {
        return Err(GroupError::DimensionMismatch {
            expected: rep.dim(),
            found: rho0.dim(),
        });
    }
    let n = rep.order();
    let mut states = vec![rho0.clone()];
    // (state, element) -> image, filled as states are discovered
    let mut images: Vec<Vec<usize>> = Vec::new();
    let mut next = 0;
    while next < states.len() {
        let src = states[next].clone();
        let mut row = Vec::with_capacity(n);
        for u in rep.elements() {
            let img = src.conjugate_by(u);
            let found = states.iter().position(|s| s.distance(&img) <= DEDUP_TOL);
            let idx = found.unwrap_or_else(|| {
                states.push(img);
                states.len() - 1
            });
            row.push(idx);
        }
        images.push(row);
        next += 1;
    }
    let size = states.len();
    let mut action = vec![0; n * size];
    for (s, row) in images.iter().enumerate() {
        for (g, &t) in row.iter().enumerate() {
            action[g * size + s] = t;
        }
    }
    Ok(OrbitTable {
        states,
        action,
        transitive: true,
        stabilizer_order: n / size,
    })
}

/// Fiducial commitment state of a builtin.
#[derive(Clone, Debug)]
pub enum Fiducial {
    Pure(StateVector),
    Mixed(DensityOperator),
}

impl Fiducial {
    pub fn density(&self) -> DensityOperator {
        match self {
            Fiducial::Pure(v) => v.projector(),
            Fiducial::Mixed(rho) => rho.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Fiducial::Pure(v) => v.dim(),
            Fiducial::Mixed(rho) => rho.dim(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BuiltinName {
    Tetrahedral,
    Pauli2,
    Quaternion,
    ReducibleDemo,
}

impl BuiltinName {
    pub const ALL: [BuiltinName; 4] = [
        BuiltinName::Tetrahedral,
        BuiltinName::Pauli2,
        BuiltinName::Quaternion,
        BuiltinName::ReducibleDemo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BuiltinName::Tetrahedral => "tetrahedral",
            BuiltinName::Pauli2 => "pauli2",
            BuiltinName::Quaternion => "quaternion",
            BuiltinName::ReducibleDemo => "reducible_demo",
        }
    }
}

impl fmt::Display for BuiltinName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BuiltinName {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| GroupError::UnknownBuiltin(s.to_string()))
    }
}

/// A builtin representation with its default fiducial.
#[derive(Clone, Debug)]
pub struct Builtin {
    pub name: BuiltinName,
    pub rep: ProjectiveRep,
    pub fiducial: Fiducial,
    pub bits_per_copy: usize,
    /// Orbit states in bit-label order, when the fixture prescribes one.
    pub labeled_states: Option<Vec<DensityOperator>>,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn omega() -> C64 {
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]])
        .expect("2x2")
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_diag(&[c(1., 0.), c(-1., 0.)])
}

/// Generators of the tetrahedral rotation group: `diag(1, ω)` and the
/// π-rotation `−i(√(2/3)X + √(1/3)Z)`.
pub fn tetrahedral_generators() -> Vec<ComplexMatrix> {
    let a = ComplexMatrix::from_diag(&[c(1., 0.), omega()]);
    let b = (&pauli_x().scale(c((2.0f64 / 3.0).sqrt(), 0.))
        + &pauli_z().scale(c((1.0f64 / 3.0).sqrt(), 0.)))
        .scale(c(0., -1.));
    vec![a, b]
}

/// The four qubit states `|ξ;00⟩, |ξ;01⟩, |ξ;10⟩, |ξ;11⟩` in label order.
pub fn tetrahedral_states() -> Vec<StateVector> {
    let s1 = (1.0f64 / 3.0).sqrt();
    let s2 = (2.0f64 / 3.0).sqrt();
    let w = omega();
    vec![
        StateVector::basis(2, 0),
        StateVector::new(vec![c(s1, 0.), c(s2, 0.)]).expect("unit"),
        StateVector::new(vec![c(s1, 0.), w * s2]).expect("unit"),
        StateVector::new(vec![c(s1, 0.), w * w * s2]).expect("unit"),
    ]
}

pub fn builtin_rep(name: BuiltinName) -> Result<Builtin, GroupError> {
    match name {
        BuiltinName::Tetrahedral => {
            let rep = close_group(&tetrahedral_generators(), DEFAULT_GROUP_CAP)?;
            let reference: Vec<DensityOperator> = tetrahedral_states()
                .iter()
                .map(StateVector::projector)
                .collect();
            let fiducial = Fiducial::Pure(StateVector::basis(2, 0));
            let orb = orbit(&rep, &fiducial.density())?;
            if rep.order() != 12 || orb.len() != 4 {
                return Err(GroupError::FixtureMismatch(
                    "tetrahedral",
                    format!("order {} orbit {}", rep.order(), orb.len()),
                ));
            }
            for (label, r) in reference.iter().enumerate() {
                if !orb.states().iter().any(|s| s.distance(r) <= DEDUP_TOL) {
                    return Err(GroupError::FixtureMismatch(
                        "tetrahedral",
                        format!("state for label {label:02b} missing from orbit"),
                    ));
                }
            }
            Ok(Builtin {
                name,
                rep,
                fiducial,
                bits_per_copy: 2,
                labeled_states: Some(reference),
            })
        }
        BuiltinName::Pauli2 => Ok(Builtin {
            name,
            rep: close_group(&[pauli_x(), pauli_z()], DEFAULT_GROUP_CAP)?,
            fiducial: Fiducial::Pure(StateVector::basis(2, 0)),
            bits_per_copy: 1,
            labeled_states: None,
        }),
        BuiltinName::Quaternion => {
            let gens = [pauli_x().scale(c(0., 1.)), pauli_z().scale(c(0., 1.))];
            Ok(Builtin {
                name,
                rep: close_group(&gens, DEFAULT_GROUP_CAP)?,
                fiducial: Fiducial::Mixed(DensityOperator::diagonal(&[0.9, 0.1])?),
                bits_per_copy: 1,
                labeled_states: None,
            })
        }
        BuiltinName::ReducibleDemo => {
            let tet = close_group(&tetrahedral_generators(), DEFAULT_GROUP_CAP)?;
            Ok(Builtin {
                name,
                rep: tet.doubled(),
                fiducial: Fiducial::Pure(StateVector::basis(4, 0)),
                bits_per_copy: 2,
                labeled_states: None,
            })
        }
    }
}
