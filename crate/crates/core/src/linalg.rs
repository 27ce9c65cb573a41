//! Dense vector/matrix arithmetic, symmetric eigendecomposition, and
//! Cholesky factorization.
//!
//! Everything here is sized for the rest of the crate: matrices are a few
//! dozen rows at most, so the implementations favor robustness and
//! determinism over asymptotics. All tolerances are relative to
//! `max(1, frobenius_norm)` because scenario magnitudes vary by orders of
//! magnitude after perturbation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance for the symmetry check in [`sym_eigen`].
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Jacobi sweep cap; exceeding it reports [`LinalgError::NoConvergence`].
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Off-diagonal norm target for Jacobi convergence, relative to scale.
const JACOBI_OFF_TOL: f64 = 1e-13;
/// Relative pivot floor under which Cholesky declares the matrix not PD.
pub const CHOLESKY_PIVOT_TOL: f64 = 1e-14;

/// Errors from dense linear algebra routines.
#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix dimensions inconsistent: {0}")]
    DimensionMismatch(String),
    #[error("matrix entry at ({0},{1}) is not finite")]
    NotFinite(usize, usize),
    #[error("matrix is not symmetric: |A[{i}][{j}] - A[{j}][{i}]| = {diff:e}")]
    NonSymmetric { i: usize, j: usize, diff: f64 },
    #[error("Jacobi iteration did not converge within {JACOBI_MAX_SWEEPS} sweeps")]
    NoConvergence,
    #[error("matrix is not positive definite (pivot {pivot:e} at column {col})")]
    NotPositiveDefinite { col: usize, pivot: f64 },
}

/// Dense row-major matrix of `f64` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries; every entry must be finite.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        for (idx, &e) in entries.iter().enumerate() {
            if !e.is_finite() {
                return Err(LinalgError::NotFinite(idx / cols.max(1), idx % cols.max(1)));
            }
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::DimensionMismatch("ragged rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "matvec: {} columns vs vector of length {}",
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self, LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self { rows: self.rows, cols: self.cols, entries })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&e| c * e).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|e| e * e).sum::<f64>().sqrt()
    }

    /// `max(1, frobenius_norm)`: the scale factor all tolerances are relative to.
    pub fn scale(&self) -> f64 {
        self.frobenius_norm().max(1.0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.symmetry_violation(tol).is_none()
    }

    fn symmetry_violation(&self, tol: f64) -> Option<(usize, usize, f64)> {
        if !self.is_square() {
            return Some((0, 0, f64::INFINITY));
        }
        let allowed = tol * self.scale();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let diff = (self[(i, j)] - self[(j, i)]).abs();
                if diff > allowed {
                    return Some((i, j, diff));
                }
            }
        }
        None
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.entries[i * self.cols + j]
    }
}

impl TryFrom<Vec<Vec<f64>>> for DenseMatrix {
    type Error = LinalgError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, LinalgError> {
        Self::from_rows(rows)
    }
}

impl From<DenseMatrix> for Vec<Vec<f64>> {
    fn from(m: DenseMatrix) -> Self {
        m.to_rows()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues sorted ascending and the matching orthonormal
/// eigenvectors as columns, so `A * V = V * diag(lambda)`. Each eigenvector's
/// largest-magnitude component is made nonnegative for determinism.
pub fn sym_eigen(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix), LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    if let Some((i, j, diff)) = a.symmetry_violation(SYMMETRY_TOL) {
        return Err(LinalgError::NonSymmetric { i, j, diff });
    }
    let n = a.rows;
    let mut work = a.clone();
    let mut v = DenseMatrix::identity(n);
    let target = JACOBI_OFF_TOL * a.scale();

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += work[(i, j)] * work[(i, j)];
            }
        }
        if (2.0 * off).sqrt() <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = work[(p, q)];
                if apq.abs() <= target / (n as f64 * n as f64) {
                    continue;
                }
                // Rotation angle zeroing entry (p,q): t solves t^2 + 2*theta*t - 1 = 0.
                let theta = (work[(q, q)] - work[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e12 {
                    1.0 / (2.0 * theta)
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = work[(k, p)];
                    let akq = work[(k, q)];
                    work[(k, p)] = c * akp - s * akq;
                    work[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = work[(p, k)];
                    let aqk = work[(q, k)];
                    work[(p, k)] = c * apk - s * aqk;
                    work[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| work[(i, i)].partial_cmp(&work[(j, j)]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| work[(i, i)]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut extreme = 0usize;
        for k in 1..n {
            if v[(k, src)].abs() > v[(extreme, src)].abs() {
                extreme = k;
            }
        }
        let sign = if v[(extreme, src)] < 0.0 { -1.0 } else { 1.0 };
        for k in 0..n {
            vectors[(k, dst)] = sign * v[(k, src)];
        }
    }
    Ok((eigenvalues, vectors))
}

/// Cholesky factorization `A = L * L^T` with `L` lower triangular.
pub fn cholesky(a: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::DimensionMismatch(format!(
            "Cholesky needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    if let Some((i, j, diff)) = a.symmetry_violation(SYMMETRY_TOL) {
        return Err(LinalgError::NonSymmetric { i, j, diff });
    }
    let n = a.rows;
    let floor = CHOLESKY_PIVOT_TOL * a.scale();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = a[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if pivot <= floor {
            return Err(LinalgError::NotPositiveDefinite { col: j, pivot });
        }
        let ljj = pivot.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut sum = a[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = sum / ljj;
        }
    }
    Ok(l)
}

/// Solves `A * x = b` for symmetric positive-definite `A` via Cholesky.
pub fn solve_spd(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if b.len() != a.rows {
        return Err(LinalgError::DimensionMismatch(format!(
            "solve: {} rows vs right-hand side of length {}",
            a.rows,
            b.len()
        )));
    }
    let l = cholesky(a)?;
    let n = a.rows;
    // Forward substitution L*y = b, then back substitution L^T*x = y.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[(i, k)] * y[k];
        }
        y[i] = sum / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[(k, i)] * x[k];
        }
        x[i] = sum / l[(i, i)];
    }
    Ok(x)
}
