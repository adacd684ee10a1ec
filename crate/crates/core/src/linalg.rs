//! Small dense symmetric matrices and their Cholesky factors.
//!
//! Dimensions here are tiny (d <= 10), so everything is row-major `Vec`
//! storage with straightforward loops.

use serde::{Deserialize, Serialize};

use crate::error::{EdaError, Result};
use crate::scalar::Scalar;

/// Square matrix expected to be symmetric; row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct SymMatrix<F> {
    dim: usize,
    data: Vec<F>,
}

impl<F: Scalar> SymMatrix<F> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![F::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, F::one())
    }

    pub fn scaled_identity(dim: usize, s: F) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, s);
        }
        m
    }

    pub fn diagonal(diag: &[F]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds from rows; rejects ragged or non-square input.
    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(EdaError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.dim + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<F>> {
        self.data
            .chunks(self.dim.max(1))
            .map(|r| r.to_vec())
            .collect()
    }

    pub fn trace(&self) -> F {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self += w * v vᵀ`
    pub fn add_outer(&mut self, w: F, v: &[F]) {
        debug_assert_eq!(v.len(), self.dim);
        for i in 0..self.dim {
            let wi = w * v[i];
            for j in 0..self.dim {
                let idx = i * self.dim + j;
                self.data[idx] = self.data[idx] + wi * v[j];
            }
        }
    }

    pub fn scale(&mut self, s: F) {
        for v in &mut self.data {
            *v = *v * s;
        }
    }

    pub fn add_diagonal(&mut self, s: F) {
        for i in 0..self.dim {
            let idx = i * self.dim + i;
            self.data[idx] = self.data[idx] + s;
        }
    }

    /// Averages the matrix with its transpose, removing rounding asymmetry.
    pub fn symmetrize(&mut self) {
        let two = F::lit(2.0);
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let a = (self.get(i, j) + self.get(j, i)) / two;
                self.set(i, j, a);
                self.set(j, i, a);
            }
        }
    }

    /// `|a_ij - a_ji| <= tol * max(1, |a_ij|)` for every pair.
    pub fn is_symmetric(&self, tol: F) -> bool {
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let a = self.get(i, j);
                let b = self.get(j, i);
                if (a - b).abs() > tol * F::one().max(a.abs()) {
                    return false;
                }
            }
        }
        true
    }

    pub fn max_abs_diff(&self, other: &Self) -> F {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(F::zero(), F::max)
    }
}

/// Lower-triangular factor `L` with `L Lᵀ = Σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cholesky<F> {
    dim: usize,
    lower: Vec<F>,
}

impl<F: Scalar> Cholesky<F> {
    pub fn factor(m: &SymMatrix<F>) -> Result<Self> {
        let n = m.dim();
        let mut l = vec![F::zero(); n * n];
        for j in 0..n {
            let mut diag = m.get(j, j);
            for k in 0..j {
                diag = diag - l[j * n + k] * l[j * n + k];
            }
            if !(diag > F::zero()) || !diag.is_finite() {
                return Err(EdaError::degenerate(format!(
                    "matrix is not positive definite (pivot {j} = {diag})"
                )));
            }
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = m.get(i, j);
                for k in 0..j {
                    s = s - l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Self { dim: n, lower: l })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn lower(&self, i: usize, j: usize) -> F {
        self.lower[i * self.dim + j]
    }

    /// `L z`
    pub fn mul_lower(&self, z: &[F]) -> Vec<F> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                let row = &self.lower[i * n..i * n + i + 1];
                row.iter().zip(z).map(|(&a, &b)| a * b).sum()
            })
            .collect()
    }

    /// Forward substitution: solves `L y = b`.
    pub fn solve_lower(&self, b: &[F]) -> Vec<F> {
        let n = self.dim;
        let mut y = vec![F::zero(); n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s = s - self.lower[i * n + k] * y[k];
            }
            y[i] = s / self.lower[i * n + i];
        }
        y
    }

    /// `bᵀ Σ⁻¹ b` via `|L⁻¹ b|²`.
    pub fn quad_form_inv(&self, b: &[F]) -> F {
        self.solve_lower(b).iter().map(|&v| v * v).sum()
    }

    /// `ln |Σ|`
    pub fn log_det(&self) -> F {
        let two = F::lit(2.0);
        (0..self.dim).map(|i| two * self.lower(i, i).ln()).sum()
    }

    /// Rebuilds `L Lᵀ`.
    pub fn reconstruct(&self) -> SymMatrix<F> {
        let n = self.dim;
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let s: F = (0..=j).map(|k| self.lower(i, k) * self.lower(j, k)).sum();
                m.set(i, j, s);
                m.set(j, i, s);
            }
        }
        m
    }
}

/// Ridge added to every freshly estimated scale matrix: a relative term
/// `rel * trace / d` with an absolute floor.
#[derive(Clone, Copy, Debug)]
pub struct Jitter<F> {
    pub relative: F,
    pub floor: F,
}

impl<F: Scalar> Jitter<F> {
    pub fn standard() -> Self {
        Self {
            relative: F::lit(1e-9).max(F::epsilon() * F::lit(8.0)),
            floor: F::lit(1e-12),
        }
    }

    /// Fallback tier used when the standard ridge still fails to factor.
    pub fn retry() -> Self {
        Self {
            relative: F::lit(1e-6).max(F::epsilon() * F::lit(64.0)),
            floor: F::lit(1e-9),
        }
    }

    pub fn amount(&self, m: &SymMatrix<F>) -> F {
        let d = F::from_usize_lossy(m.dim().max(1));
        (self.relative * m.trace().abs() / d).max(self.floor)
    }
}

/// Adds the standard ridge and factors, retrying once with the larger ridge.
/// Returns the regularized matrix together with its factor.
pub fn regularized_factor<F: Scalar>(m: &SymMatrix<F>) -> Result<(SymMatrix<F>, Cholesky<F>)> {
    if !m.is_finite() {
        return Err(EdaError::degenerate("scale matrix has non-finite entries"));
    }
    let mut base = m.clone();
    base.symmetrize();
    let mut last_err = None;
    for jitter in [Jitter::standard(), Jitter::retry()] {
        let mut candidate = base.clone();
        candidate.add_diagonal(jitter.amount(&base));
        match Cholesky::factor(&candidate) {
            Ok(chol) => return Ok((candidate, chol)),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// Factors `m` as given; falls back to [`regularized_factor`] only if the
/// plain factorization fails.
pub fn factor_or_regularize<F: Scalar>(m: &SymMatrix<F>) -> Result<(SymMatrix<F>, Cholesky<F>)> {
    if !m.is_finite() {
        return Err(EdaError::degenerate("scale matrix has non-finite entries"));
    }
    match Cholesky::factor(m) {
        Ok(chol) => Ok((m.clone(), chol)),
        Err(_) => regularized_factor(m),
    }
}
