//! Hermitian eigendecomposition (cyclic complex Jacobi) and Schmidt
//! decomposition built on top of it.

use num_complex::Complex64 as C64;

use super::matrix::{complete_basis, fix_phase, ComplexMatrix, StateVector};
use super::QalgError;

const HERMITIAN_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;
const TIE_TOL: f64 = 1e-9;

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<StateVector>,
}

impl HermitianEigen {
    /// `Σ λ_a v_a v_a†`
    pub fn reconstruct(&self) -> ComplexMatrix {
        let dim = self.values.len();
        let mut out = ComplexMatrix::zeros(dim, dim);
        for (l, v) in self.values.iter().zip(&self.vectors) {
            let amps = v.amplitudes();
            for i in 0..dim {
                for j in 0..dim {
                    out[(i, j)] += amps[i] * amps[j].conj() * *l;
                }
            }
        }
        out
    }
}

pub fn eig_hermitian(h: &ComplexMatrix) -> Result<HermitianEigen, QalgError> {
    if !h.is_square() {
        return Err(QalgError::NotSquare {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(QalgError::NotHermitian(defect));
    }
    let n = h.rows();
    // symmetrize so round-off in the input cannot bias the rotations
    let mut a = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut pairs: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|k| {
            let mut col = v.column(k);
            fix_phase(&mut col);
            (a[(k, k)].re, col)
        })
        .collect();
    sort_eigenpairs(&mut pairs);

    let (values, vectors) = pairs
        .into_iter()
        .map(|(l, col)| {
            (
                l,
                StateVector::normalized(col).expect("Jacobi columns are unit vectors"),
            )
        })
        .unzip();
    Ok(HermitianEigen { values, vectors })
}

/// One Jacobi rotation zeroing `a[p][q]`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag < 1e-300 {
        return;
    }
    let alpha = a[(p, p)].re;
    let gamma = a[(q, q)].re;
    // remove the phase of a_pq, then a real symmetric rotation
    let phase = apq / mag;
    let zeta = (gamma - alpha) / (2.0 * mag);
    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
    let t = if zeta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // G restricted to (p, q):  [[c, s], [-s·e^{-iφ}, c·e^{-iφ}]]
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

/// Descending by value; near-ties ordered by the rounded eigenvector entries.
fn sort_eigenpairs(pairs: &mut [(f64, Vec<C64>)]) {
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[end - 1].0 - pairs[end].0 <= TIE_TOL {
            end += 1;
        }
        if end - start > 1 {
            pairs[start..end].sort_by_key(|p| rounded_key(&p.1));
        }
        start = end;
    }
}

fn rounded_key(v: &[C64]) -> Vec<(i64, i64)> {
    v.iter()
        .map(|z| {
            (
                (z.re / TIE_TOL).round() as i64,
                (z.im / TIE_TOL).round() as i64,
            )
        })
        .collect()
}

/// `ψ = Σ_a coeff_a |ν_a⟩ ⊗ |μ_a⟩` with `min(dim_a, dim_b)` terms.
#[derive(Clone, Debug)]
pub struct Schmidt {
    pub coeffs: Vec<f64>,
    pub basis_a: Vec<StateVector>,
    pub basis_b: Vec<StateVector>,
}

impl Schmidt {
    pub fn reconstruct(&self) -> Vec<C64> {
        let da = self.basis_a[0].dim();
        let db = self.basis_b[0].dim();
        let mut out = vec![C64::new(0.0, 0.0); da * db];
        for ((c, nu), mu) in self.coeffs.iter().zip(&self.basis_a).zip(&self.basis_b) {
            for (i, a) in nu.amplitudes().iter().enumerate() {
                for (j, b) in mu.amplitudes().iter().enumerate() {
                    out[i * db + j] += a * b * *c;
                }
            }
        }
        out
    }
}

/// Schmidt decomposition. When `dim_a ≤ dim_b` both bases are completed so
/// that the B-side vectors span the full `min(dim_a, dim_b)` terms even for
/// vanishing coefficients.
pub fn schmidt(psi: &StateVector, dim_a: usize, dim_b: usize) -> Result<Schmidt, QalgError> {
    if dim_a == 0 || dim_b == 0 || dim_a * dim_b != psi.dim() {
        return Err(QalgError::Factorization {
            dim: psi.dim(),
            dim_a,
            dim_b,
        });
    }
    let amps = psi.amplitudes();
    // M is dim_a × dim_b; ρ_A = M M†
    let m = ComplexMatrix::new(dim_a, dim_b, amps.to_vec())?;
    let eig = eig_hermitian(&(&m * &m.adjoint()))?;
    let terms = dim_a.min(dim_b);

    let mut coeffs = Vec::with_capacity(terms);
    let mut basis_a = Vec::with_capacity(terms);
    let mut mus: Vec<Vec<C64>> = Vec::with_capacity(terms);
    for (l, nu) in eig.values.iter().zip(&eig.vectors).take(terms) {
        let coeff = l.max(0.0).sqrt();
        coeffs.push(coeff);
        basis_a.push(nu.clone());
        if coeff > 1e-7 {
            // μ_j = Σ_i conj(ν_i) M_ij / coeff
            let nu = nu.amplitudes();
            let mut mu = vec![C64::new(0.0, 0.0); dim_b];
            for (i, nu_i) in nu.iter().enumerate() {
                for (j, mu_j) in mu.iter_mut().enumerate() {
                    *mu_j += nu_i.conj() * m[(i, j)];
                }
            }
            mus.push(mu.into_iter().map(|z| z / coeff).collect());
        }
    }
    // re-orthonormalize the computed μ's then complete
    let mut ortho: Vec<Vec<C64>> = Vec::with_capacity(terms);
    for mut mu in mus {
        for u in &ortho {
            let ov = super::matrix::inner(u, &mu);
            for (x, y) in mu.iter_mut().zip(u) {
                *x -= ov * y;
            }
        }
        let n = super::matrix::l2_norm(&mu);
        ortho.push(mu.into_iter().map(|z| z / n).collect());
    }
    let full = complete_basis(ortho, dim_b);
    let basis_b = full
        .into_iter()
        .take(terms)
        .map(|v| StateVector::normalized(v).expect("orthonormal completion"))
        .collect();
    Ok(Schmidt {
        coeffs,
        basis_a,
        basis_b,
    })
}
