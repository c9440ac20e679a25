//! Binding analysis: the exact bound on `Σ_x p̃_x` for covariant protocols,
//! its Rényi-entropy form, the maximally-entangled cheating strategy that
//! saturates it, and a numerical adversary used as an independent check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::protocol::{BitString, ProtocolError, Purification, QscProtocol};
use crate::qalg::{
    complete_basis, eig_hermitian, inner, l2_norm, reduced_state, schmidt, spectrum_entropy,
    ComplexMatrix, DensityOperator, Keep, QalgError, Renyi, StateVector, C64,
};

const COMPLETENESS_TOL: f64 = 1e-9;
const ATTACK_UNITARY_TOL: f64 = 1e-9;
/// Largest Bob dimension for which attacks are evaluated on the full register.
pub const FULL_ATTACK_DIM_CAP: usize = 64;
/// Largest Bob dimension for the numerical adversary (committed state ≤ 64 amplitudes).
pub const SEARCH_DIM_CAP: usize = 8;
pub const DEFAULT_SEARCH_RESTARTS: usize = 50;
const SEARCH_MAX_ITERS: usize = 2000;
const SEARCH_REL_GAIN: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum BindingError {
    #[error("strategy committed state has {found} amplitudes, expected {expected}")]
    CommittedDim { expected: usize, found: usize },
    #[error("strategy needs reveal operators for {expected} strings, found {found}")]
    RevealCount { expected: usize, found: usize },
    #[error(
        "reveal operator for x={x} has shape {rows}x{cols}, expected {min_rows}+ x {cols_expected}"
    )]
    RevealShape {
        x: usize,
        rows: usize,
        cols: usize,
        min_rows: usize,
        cols_expected: usize,
    },
    #[error("reveal operators for x={x} violate completeness (defect {defect:e})")]
    Incomplete { x: usize, defect: f64 },
    #[error("reveal set for x={0} is empty")]
    EmptyReveal(usize),
    #[error("instance too large: Bob dimension {dim} exceeds {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("attack operator for x={x} is not unitary (defect {defect:e})")]
    AttackNotUnitary { x: usize, defect: f64 },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Qalg(#[from] QalgError),
}

/// Analytic bound on `Σ_x p̃_x`.
#[derive(Clone, Debug, PartialEq)]
pub struct BindingBound {
    /// Spectrum of any single `ρ_x` on the full register, descending.
    pub eigenvalues: Vec<f64>,
    pub sum_bound: f64,
    pub a_bits: f64,
}

/// All k-fold products of `single`, descending.
pub fn kfold_spectrum(single: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..k {
        out = out
            .iter()
            .flat_map(|a| single.iter().map(move |b| a * b))
            .collect();
    }
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

fn full_spectrum(p: &QscProtocol) -> Result<Vec<f64>, BindingError> {
    let single = p.copy_state(0).spectrum()?;
    Ok(kfold_spectrum(&single, p.copies()))
}

/// `(2^n / d) (Σ_a √λ_a)²`
pub fn binding_bound(p: &QscProtocol) -> Result<BindingBound, BindingError> {
    let eigenvalues = full_spectrum(p)?;
    let root_sum: f64 = eigenvalues.iter().map(|l| l.sqrt()).sum();
    let sum_bound = p.num_strings() as f64 / p.dim() as f64 * root_sum * root_sum;
    Ok(BindingBound {
        a_bits: sum_bound.log2(),
        eigenvalues,
        sum_bound,
    })
}

/// `n − [S(I/d) − S_{1/2}(ρ_0)]` in bits.
pub fn renyi_bound(p: &QscProtocol) -> Result<f64, BindingError> {
    let eigenvalues = full_spectrum(p)?;
    let s_mixed = (p.dim() as f64).log2();
    Ok(p.n() as f64 - (s_mixed - spectrum_entropy(&eigenvalues, Renyi::Half)))
}

/// Alice's cheating strategy: a committed state on `H_Ã ⊗ H_B` and, per
/// string, Kraus operators `E_xi : H_Ã → H_A'` applied before revealing.
#[derive(Clone, Debug)]
pub struct AttackStrategy {
    committed: StateVector,
    dim_ancilla: usize,
    reveal_ops: Vec<Vec<ComplexMatrix>>,
}

impl AttackStrategy {
    /// `reveal_ops[x]` lists the Kraus operators for the string with numeric
    /// value `x`; each must have `dim_ancilla` columns and `Σ_i E†E = I`.
    pub fn new(
        committed: StateVector,
        dim_ancilla: usize,
        reveal_ops: Vec<Vec<ComplexMatrix>>,
    ) -> Result<Self, BindingError> {
        if dim_ancilla == 0 || !committed.dim().is_multiple_of(dim_ancilla) {
            return Err(BindingError::CommittedDim {
                expected: dim_ancilla,
                found: committed.dim(),
            });
        }
        for (x, ops) in reveal_ops.iter().enumerate() {
            if ops.is_empty() {
                return Err(BindingError::EmptyReveal(x));
            }
            let mut acc = ComplexMatrix::zeros(dim_ancilla, dim_ancilla);
            for e in ops {
                if e.cols() != dim_ancilla {
                    return Err(BindingError::RevealShape {
                        x,
                        rows: e.rows(),
                        cols: e.cols(),
                        min_rows: 1,
                        cols_expected: dim_ancilla,
                    });
                }
                acc = &acc + &(&e.adjoint() * e);
            }
            let defect = acc.max_abs_diff(&ComplexMatrix::identity(dim_ancilla));
            if defect > COMPLETENESS_TOL {
                return Err(BindingError::Incomplete { x, defect });
            }
        }
        Ok(Self {
            committed,
            dim_ancilla,
            reveal_ops,
        })
    }

    pub fn committed(&self) -> &StateVector {
        &self.committed
    }

    pub fn dim_ancilla(&self) -> usize {
        self.dim_ancilla
    }

    pub fn dim_bob(&self) -> usize {
        self.committed.dim() / self.dim_ancilla
    }

    pub fn reveal_ops(&self) -> &[Vec<ComplexMatrix>] {
        &self.reveal_ops
    }

    /// What Bob holds after the commit phase, `Tr_Ã |Ψ⟩⟨Ψ|`.
    pub fn bob_state(&self) -> DensityOperator {
        reduced_state(&self.committed, self.dim_ancilla, self.dim_bob(), Keep::B)
            .expect("strategy dimensions are consistent")
    }
}

/// Per-string acceptance probabilities and their sum.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategyOutcome {
    pub per_x: Vec<f64>,
    pub sum: f64,
}

fn honest_family(p: &QscProtocol) -> Result<Vec<Purification>, BindingError> {
    BitString::all(p.n())
        .map(|x| p.purification(&x).map_err(BindingError::from))
        .collect()
}

/// `p̃_x = Σ_i |⟨ψ̃_x| (E_xi ⊗ I) |Ψ⟩|²`, where `ψ̃_x` is the honest minimal
/// purification embedded in the leading coordinates of Alice's revealed
/// register.
pub fn evaluate_strategy(
    p: &QscProtocol,
    s: &AttackStrategy,
) -> Result<StrategyOutcome, BindingError> {
    let d = p.dim();
    if s.dim_bob() != d {
        return Err(BindingError::CommittedDim {
            expected: s.dim_ancilla() * d,
            found: s.committed().dim(),
        });
    }
    if s.reveal_ops().len() != p.num_strings() {
        return Err(BindingError::RevealCount {
            expected: p.num_strings(),
            found: s.reveal_ops().len(),
        });
    }
    let family = honest_family(p)?;
    let psi_big = s.committed().amplitudes();
    let da = s.dim_ancilla();
    let mut per_x = Vec::with_capacity(family.len());
    for (x, (honest, ops)) in family.iter().zip(s.reveal_ops()).enumerate() {
        let r = honest.dim_a;
        let h = honest.state.amplitudes();
        let mut px = 0.0;
        for e in ops {
            if e.rows() < r {
                return Err(BindingError::RevealShape {
                    x,
                    rows: e.rows(),
                    cols: e.cols(),
                    min_rows: r,
                    cols_expected: da,
                });
            }
            let mut amp = C64::new(0.0, 0.0);
            for i in 0..r {
                for j in 0..d {
                    let ep: C64 = (0..da).map(|a| e[(i, a)] * psi_big[a * d + j]).sum();
                    amp += h[i * d + j].conj() * ep;
                }
            }
            px += amp.norm_sqr();
        }
        per_x.push(px);
    }
    let sum = per_x.iter().sum();
    Ok(StrategyOutcome { per_x, sum })
}

/// `(1/√d) Σ_a |a⟩|a⟩`
pub fn maximally_entangled(d: usize) -> StateVector {
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    let s = 1.0 / (d as f64).sqrt();
    for a in 0..d {
        amps[a * d + a] = C64::new(s, 0.0);
    }
    StateVector::new(amps).expect("unit norm")
}

/// Commit `|Φ_ME⟩` on `d × d`; to reveal `x`, apply the single unitary
/// `E_x = Σ_a |ν_a⟩⟨μ_a*|` built from the Schmidt bases of `ψ̃_x`.
pub fn me_attack(p: &QscProtocol) -> Result<AttackStrategy, BindingError> {
    let d = p.dim();
    if d > FULL_ATTACK_DIM_CAP {
        return Err(BindingError::TooLarge {
            dim: d,
            cap: FULL_ATTACK_DIM_CAP,
        });
    }
    let family = honest_family(p)?;
    let mut reveal_ops = Vec::with_capacity(family.len());
    for (x, honest) in family.iter().enumerate() {
        let mut padded = honest.state.amplitudes().to_vec();
        padded.resize(d * d, C64::new(0.0, 0.0));
        let sd = schmidt(&StateVector::new(padded)?, d, d)?;
        let mut e = ComplexMatrix::zeros(d, d);
        for (nu, mu) in sd.basis_a.iter().zip(&sd.basis_b) {
            for (i, a) in nu.amplitudes().iter().enumerate() {
                for (j, b) in mu.amplitudes().iter().enumerate() {
                    e[(i, j)] += a * b;
                }
            }
        }
        let defect = e.unitarity_defect();
        if defect > ATTACK_UNITARY_TOL {
            return Err(BindingError::AttackNotUnitary { x, defect });
        }
        reveal_ops.push(vec![e]);
    }
    AttackStrategy::new(maximally_entangled(d), d, reveal_ops)
}

/// Total success of the maximally-entangled attack. Registers larger than
/// [`FULL_ATTACK_DIM_CAP`] are evaluated copy by copy; the attack is then a
/// product over copies, so the total is the single-copy total to the power
/// `k`.
pub fn me_attack_sum(p: &QscProtocol) -> Result<f64, BindingError> {
    if p.dim() <= FULL_ATTACK_DIM_CAP {
        let s = me_attack(p)?;
        return Ok(evaluate_strategy(p, &s)?.sum);
    }
    let single = p.single_copy();
    let s = me_attack(&single)?;
    Ok(evaluate_strategy(&single, &s)?.sum.powi(p.copies() as i32))
}

fn gaussian_vec<R: Rng>(rng: &mut R, len: usize) -> Vec<C64> {
    (0..len)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Random valid strategy with ancilla dimension `d` and `kraus` operators
/// per string, each set cut from a random isometry.
pub fn random_strategy<R: Rng>(p: &QscProtocol, kraus: usize, rng: &mut R) -> AttackStrategy {
    let d = p.dim();
    let committed = StateVector::normalized(gaussian_vec(rng, d * d)).expect("nonzero gaussian");
    let rows = kraus.max(1) * d;
    let reveal_ops = (0..p.num_strings())
        .map(|_| {
            let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
            for _ in 0..d {
                let mut v = gaussian_vec(rng, rows);
                for _ in 0..2 {
                    for u in &cols {
                        let ov = inner(u, &v);
                        for (x, y) in v.iter_mut().zip(u) {
                            *x -= ov * y;
                        }
                    }
                }
                let n = l2_norm(&v);
                cols.push(v.into_iter().map(|z| z / n).collect());
            }
            (0..kraus.max(1))
                .map(|i| {
                    let mut e = ComplexMatrix::zeros(d, d);
                    for r in 0..d {
                        for (c, col) in cols.iter().enumerate() {
                            e[(r, c)] = col[i * d + r];
                        }
                    }
                    e
                })
                .collect()
        })
        .collect();
    AttackStrategy::new(committed, d, reveal_ops).expect("isometry blocks are complete")
}

/// Best total found by the numerical adversary.
#[derive(Clone, Debug)]
pub struct SearchResult {
    pub best_sum: f64,
    pub best_restart: usize,
    pub per_restart: Vec<f64>,
}

/// Unitary `U` maximizing `Re tr(U A)`: `U = V W†` for `A = W Σ V†`.
fn polar_unitary(a: &ComplexMatrix) -> Result<ComplexMatrix, QalgError> {
    let d = a.rows();
    let eig = eig_hermitian(&(&a.adjoint() * a))?;
    let scale = eig.values.first().copied().unwrap_or(0.0).max(1e-300);
    let mut vs = Vec::with_capacity(d);
    let mut ws: Vec<Vec<C64>> = Vec::with_capacity(d);
    for (l, v) in eig.values.iter().zip(&eig.vectors) {
        let sigma = l.max(0.0).sqrt();
        if *l <= 1e-24 * scale || sigma < 1e-150 {
            break;
        }
        let mut w: Vec<C64> = a
            .apply(v.amplitudes())
            .into_iter()
            .map(|z| z / sigma)
            .collect();
        for u in &ws {
            let ov = inner(u, &w);
            for (x, y) in w.iter_mut().zip(u) {
                *x -= ov * y;
            }
        }
        let n = l2_norm(&w);
        if n < 1e-8 {
            break;
        }
        ws.push(w.into_iter().map(|z| z / n).collect());
        vs.push(v.amplitudes().to_vec());
    }
    let vs = complete_basis(vs, d);
    let mut ws = complete_basis(ws, d);
    ws.truncate(d);
    let mut u = ComplexMatrix::zeros(d, d);
    for (v, w) in vs.iter().zip(&ws) {
        for r in 0..d {
            for c in 0..d {
                u[(r, c)] += v[r] * w[c].conj();
            }
        }
    }
    Ok(u)
}

/// Honest `ψ̃_x` as a `d × d` matrix (ancilla rows padded with zeros).
fn padded_matrix(honest: &Purification, d: usize) -> ComplexMatrix {
    let mut amps = honest.state.amplitudes().to_vec();
    amps.resize(d * d, C64::new(0.0, 0.0));
    ComplexMatrix::new(d, d, amps).expect("square padding")
}

/// One restart of alternating maximization. Each half-step is an exact
/// block maximum, so the objective is nondecreasing.
fn search_once(
    targets: &[ComplexMatrix],
    d: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(ComplexMatrix, Vec<ComplexMatrix>), QalgError> {
    let mut psi = ComplexMatrix::new(d, d, gaussian_vec(rng, d * d))?;
    let norm = l2_norm(psi.data());
    psi = psi.scale(C64::new(1.0 / norm, 0.0));
    let best_unitaries = |psi: &ComplexMatrix| {
        targets
            .iter()
            .map(|q| polar_unitary(&(psi * &q.adjoint())))
            .collect::<Result<Vec<_>, _>>()
    };
    let mut prev = f64::NEG_INFINITY;
    for _ in 0..SEARCH_MAX_ITERS {
        let unitaries = best_unitaries(&psi)?;
        // Ψ step: top eigenvector of Σ_x |U_x† Q_x⟩⟨U_x† Q_x|
        let mut gram = ComplexMatrix::zeros(d * d, d * d);
        for (q, u) in targets.iter().zip(&unitaries) {
            let phi = &u.adjoint() * q;
            gram = &gram + &ComplexMatrix::outer(phi.data(), phi.data());
        }
        let eig = eig_hermitian(&gram)?;
        let value = eig.values[0];
        psi = ComplexMatrix::new(d, d, eig.vectors[0].amplitudes().to_vec())?;
        if value - prev <= SEARCH_REL_GAIN * value.abs() {
            break;
        }
        prev = value;
    }
    let unitaries = best_unitaries(&psi)?;
    Ok((psi, unitaries))
}

/// Multi-start search over committed states on `d × d` and one unitary
/// reveal operator per string. Restart `i` draws from ChaCha stream `i` of
/// `seed`, so results are reproducible and a larger restart count only adds
/// candidates. Every candidate is scored with [`evaluate_strategy`].
pub fn strategy_search(
    p: &QscProtocol,
    restarts: usize,
    seed: u64,
) -> Result<SearchResult, BindingError> {
    let d = p.dim();
    if d > SEARCH_DIM_CAP {
        return Err(BindingError::TooLarge {
            dim: d,
            cap: SEARCH_DIM_CAP,
        });
    }
    let family = honest_family(p)?;
    let targets: Vec<ComplexMatrix> = family.iter().map(|h| padded_matrix(h, d)).collect();
    let mut per_restart = Vec::with_capacity(restarts);
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let (psi, unitaries) = search_once(&targets, d, &mut rng)?;
        let strategy = AttackStrategy::new(
            StateVector::normalized(psi.data().to_vec())?,
            d,
            unitaries.into_iter().map(|u| vec![u]).collect(),
        )?;
        per_restart.push(evaluate_strategy(p, &strategy)?.sum);
    }
    let (best_restart, best_sum) =
        per_restart
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| {
                if v > best.1 {
                    (i, v)
                } else {
                    best
                }
            });
    Ok(SearchResult {
        best_sum,
        best_restart,
        per_restart,
    })
}

/// Bound, Rényi form and the saturating attack's achieved total.
#[derive(Clone, Debug, PartialEq)]
pub struct BindingReport {
    pub eigenvalues: Vec<f64>,
    pub sum_bound: f64,
    pub a_bits: f64,
    pub attack_sum: f64,
    pub renyi_a_bits: f64,
}

pub fn binding_report(p: &QscProtocol) -> Result<BindingReport, BindingError> {
    let bound = binding_bound(p)?;
    Ok(BindingReport {
        attack_sum: me_attack_sum(p)?,
        renyi_a_bits: renyi_bound(p)?,
        eigenvalues: bound.eigenvalues,
        sum_bound: bound.sum_bound,
        a_bits: bound.a_bits,
    })
}
