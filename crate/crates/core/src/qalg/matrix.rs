//! Dense complex matrices, normalized state vectors and density operators.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64 as C64;

use super::eigen::eig_hermitian;
use super::QalgError;

/// Default cap on the number of entries a tensor product may produce.
pub const DEFAULT_ENTRY_CAP: usize = 1 << 20;

const STATE_NORM_TOL: f64 = 1e-10;
const DENSITY_TOL: f64 = 1e-10;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, QalgError> {
        if rows == 0 || cols == 0 {
            return Err(QalgError::EmptyMatrix);
        }
        if data.len() != rows * cols {
            return Err(QalgError::Shape {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QalgError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, QalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(QalgError::Ragged);
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// `|u⟩⟨v|`
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        let mut m = Self::zeros(u.len(), v.len());
        for (i, a) in u.iter().enumerate() {
            for (j, b) in v.iter().enumerate() {
                m[(i, j)] = a * b.conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(C64::conj).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `self · v`
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "vector length does not match columns");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Entrywise max-norm distance. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Max-norm of `U†U − I`.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.rows))
    }

    /// Max-norm distance to `other` after removing the best global phase.
    pub fn phase_aligned_diff(&self, other: &Self) -> f64 {
        let overlap: C64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum();
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a * phase - b).norm())
            .fold(0.0, f64::max)
    }

    /// `U · self · U†`
    pub fn conjugate_by(&self, u: &Self) -> Self {
        &(u * self) * &u.adjoint()
    }

    /// Direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out[(self.rows + i, self.cols + j)] = other[(i, j)];
            }
        }
        out
    }

    fn kron_unchecked(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..self.rows {
            for k in 0..other.rows {
                for j in 0..self.cols {
                    let a = self[(i, j)];
                    data.extend(other.row(k).iter().map(|b| a * b));
                }
            }
        }
        Self { rows, cols, data }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(rhs.row(k)) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product with the default entry cap.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, QalgError> {
    tensor_capped(a, b, DEFAULT_ENTRY_CAP)
}

pub fn tensor_capped(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    cap: usize,
) -> Result<ComplexMatrix, QalgError> {
    let entries = (a.rows * b.rows).saturating_mul(a.cols * b.cols);
    if entries > cap {
        return Err(QalgError::TooLarge { entries, cap });
    }
    Ok(a.kron_unchecked(b))
}

/// Unit-norm pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    /// Validates an already normalized amplitude list.
    pub fn new(amps: Vec<C64>) -> Result<Self, QalgError> {
        check_finite_nonempty(&amps)?;
        let norm = l2_norm(&amps);
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(QalgError::NotNormalized(norm));
        }
        Ok(Self { amps })
    }

    /// Rescales to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Result<Self, QalgError> {
        check_finite_nonempty(&amps)?;
        let norm = l2_norm(&amps);
        if norm < 1e-300 {
            return Err(QalgError::NotNormalized(norm));
        }
        Ok(Self {
            amps: amps.into_iter().map(|z| z / norm).collect(),
        })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> C64 {
        inner(&self.amps, &other.amps)
    }

    pub fn projector(&self) -> DensityOperator {
        DensityOperator {
            matrix: ComplexMatrix::outer(&self.amps, &self.amps),
        }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Self { amps }
    }

    /// Applies a unitary. Panics on shape mismatch.
    pub fn evolve(&self, u: &ComplexMatrix) -> Self {
        Self {
            amps: u.apply(&self.amps),
        }
    }

    /// Multiplies by the global phase that makes the first non-negligible
    /// amplitude real and nonnegative.
    pub fn phase_fixed(&self) -> Self {
        let mut amps = self.amps.clone();
        fix_phase(&mut amps);
        Self { amps }
    }
}

/// Density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, QalgError> {
        if !matrix.is_square() {
            return Err(QalgError::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let defect = matrix.hermiticity_defect();
        if defect > DENSITY_TOL {
            return Err(QalgError::NotHermitian(defect));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(QalgError::BadTrace(tr.re));
        }
        let eig = eig_hermitian(&matrix)?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < -DENSITY_TOL {
            return Err(QalgError::NegativeEigenvalue(min));
        }
        Ok(Self { matrix })
    }

    /// Skips validation; callers guarantee the invariants (products and
    /// unitary conjugates of valid operators).
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)),
        }
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self, QalgError> {
        let diag: Vec<C64> = probs.iter().map(|&p| C64::new(p, 0.0)).collect();
        Self::new(ComplexMatrix::from_diag(&diag))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `U ρ U†`
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self {
            matrix: self.matrix.conjugate_by(u),
        }
    }

    pub fn tensor(&self, other: &Self) -> Result<Self, QalgError> {
        Ok(Self {
            matrix: tensor(&self.matrix, &other.matrix)?,
        })
    }

    /// `⟨φ|ρ|φ⟩`, real part.
    pub fn expectation(&self, phi: &[C64]) -> f64 {
        inner(phi, &self.matrix.apply(phi)).re
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }

    /// Eigenvalues in descending order with round-off negatives clipped to
    /// zero. Values below `-1e-12` are rejected.
    pub fn spectrum(&self) -> Result<Vec<f64>, QalgError> {
        let eig = eig_hermitian(&self.matrix)?;
        clip_spectrum(eig.values)
    }

    /// Largest eigenvalue is 1 within `tol`.
    pub fn is_pure(&self, tol: f64) -> Result<bool, QalgError> {
        Ok(self.spectrum()?.first().is_some_and(|&l| l >= 1.0 - tol))
    }
}

pub(crate) fn clip_spectrum(values: Vec<f64>) -> Result<Vec<f64>, QalgError> {
    values
        .into_iter()
        .map(|l| {
            if l >= 0.0 {
                Ok(l.min(1.0))
            } else if l > -1e-12 {
                Ok(0.0)
            } else {
                Err(QalgError::NegativeEigenvalue(l))
            }
        })
        .collect()
}

/// Which tensor factor `partial_trace` keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

pub fn partial_trace(
    rho: &DensityOperator,
    dim_a: usize,
    dim_b: usize,
    keep: Keep,
) -> Result<DensityOperator, QalgError> {
    if dim_a == 0 || dim_b == 0 || dim_a * dim_b != rho.dim() {
        return Err(QalgError::Factorization {
            dim: rho.dim(),
            dim_a,
            dim_b,
        });
    }
    let m = rho.matrix();
    let out = match keep {
        Keep::B => {
            let mut out = ComplexMatrix::zeros(dim_b, dim_b);
            for a in 0..dim_a {
                for i in 0..dim_b {
                    for j in 0..dim_b {
                        out[(i, j)] += m[(a * dim_b + i, a * dim_b + j)];
                    }
                }
            }
            out
        }
        Keep::A => {
            let mut out = ComplexMatrix::zeros(dim_a, dim_a);
            for i in 0..dim_a {
                for j in 0..dim_a {
                    out[(i, j)] = (0..dim_b).map(|b| m[(i * dim_b + b, j * dim_b + b)]).sum();
                }
            }
            out
        }
    };
    Ok(DensityOperator::from_trusted(out))
}

/// Reduced state of a bipartite pure state without forming `|ψ⟩⟨ψ|`.
pub fn reduced_state(
    psi: &StateVector,
    dim_a: usize,
    dim_b: usize,
    keep: Keep,
) -> Result<DensityOperator, QalgError> {
    if dim_a == 0 || dim_b == 0 || dim_a * dim_b != psi.dim() {
        return Err(QalgError::Factorization {
            dim: psi.dim(),
            dim_a,
            dim_b,
        });
    }
    let c = ComplexMatrix {
        rows: dim_a,
        cols: dim_b,
        data: psi.amplitudes().to_vec(),
    };
    let out = match keep {
        Keep::A => &c * &c.adjoint(),
        // (C^T C^*)_{ij} = Σ_a c_{ai} c*_{aj}
        Keep::B => &c.transpose() * &c.conj(),
    };
    Ok(DensityOperator::from_trusted(out))
}

/// `⟨u|v⟩`
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn l2_norm(v: &[C64]) -> f64 {
    v.iter().map(C64::norm_sqr).sum::<f64>().sqrt()
}

pub(crate) fn fix_phase(v: &mut [C64]) {
    if let Some(z) = v.iter().copied().find(|z| z.norm() > 1e-9) {
        let phase = z.conj() / z.norm();
        for a in v.iter_mut() {
            *a *= phase;
        }
    }
}

fn check_finite_nonempty(v: &[C64]) -> Result<(), QalgError> {
    if v.is_empty() {
        return Err(QalgError::EmptyMatrix);
    }
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(QalgError::NonFinite);
    }
    Ok(())
}

/// Extends `vectors` (orthonormal) to an orthonormal basis of `C^dim`
/// using computational basis candidates in index order.
pub(crate) fn complete_basis(mut vectors: Vec<Vec<C64>>, dim: usize) -> Vec<Vec<C64>> {
    for k in 0..dim {
        if vectors.len() == dim {
            break;
        }
        let mut cand = vec![C64::new(0.0, 0.0); dim];
        cand[k] = C64::new(1.0, 0.0);
        // two passes of Gram-Schmidt for stability
        for _ in 0..2 {
            for v in &vectors {
                let ov = inner(v, &cand);
                for (c, x) in cand.iter_mut().zip(v) {
                    *c -= ov * x;
                }
            }
        }
        let norm = l2_norm(&cand);
        if norm > 1e-6 {
            vectors.push(cand.into_iter().map(|z| z / norm).collect());
        }
    }
    vectors
}
