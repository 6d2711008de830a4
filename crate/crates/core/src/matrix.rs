//! Dense symmetric matrices and the spectral primitives built on them.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Entries below this magnitude are skipped when fixing eigenvector signs.
const SIGN_EPS: f64 = 1e-12;

/// A dense real symmetric matrix.
///
/// Every constructor symmetrizes its input, so `get(i, j) == get(j, i)`
/// holds bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    inner: DMatrix<f64>,
}

impl SymMatrix {
    /// Wraps a square matrix after checking it is finite and symmetric within `tol`
    /// (absolute, entrywise).
    pub fn from_dmatrix_checked(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        check_square_finite(&m)?;
        let p = m.nrows();
        for i in 0..p {
            for j in (i + 1)..p {
                let d = (m[(i, j)] - m[(j, i)]).abs();
                if d > tol {
                    return Err(Error::InvalidMatrix(format!(
                        "asymmetric at ({}, {}): difference {:e}",
                        i + 1,
                        j + 1,
                        d
                    )));
                }
            }
        }
        Ok(Self::symmetrize(m))
    }

    /// Wraps a square finite matrix, replacing it by `(A + Aᵀ)/2`.
    pub fn from_dmatrix(m: DMatrix<f64>) -> Result<Self> {
        check_square_finite(&m)?;
        Ok(Self::symmetrize(m))
    }

    fn symmetrize(mut m: DMatrix<f64>) -> Self {
        let p = m.nrows();
        for i in 0..p {
            for j in (i + 1)..p {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self { inner: m }
    }

    /// Builds a matrix from the upper triangle `f(i, j)`, `i <= j`.
    pub fn from_upper_fn(p: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidMatrix("order must be at least 1".into()));
        }
        let mut m = DMatrix::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        check_square_finite(&m)?;
        Ok(Self { inner: m })
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_slice(p: usize, data: &[f64]) -> Result<Self> {
        if data.len() != p * p {
            return Err(Error::DimensionMismatch {
                expected: p * p,
                found: data.len(),
            });
        }
        Self::from_dmatrix(DMatrix::from_row_slice(p, p, data))
    }

    pub fn identity(p: usize) -> Self {
        Self {
            inner: DMatrix::identity(p, p),
        }
    }

    pub fn zeros(p: usize) -> Self {
        Self {
            inner: DMatrix::zeros(p, p),
        }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self {
            inner: DMatrix::from_diagonal(&DVector::from_column_slice(d)),
        }
    }

    pub fn order(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.inner
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.inner.diagonal().iter().copied().collect()
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.amax()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            inner: &self.inner * c,
        }
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        Self {
            inner: &self.inner + &other.inner,
        }
    }

    pub fn sub(&self, other: &SymMatrix) -> Self {
        Self {
            inner: &self.inner - &other.inner,
        }
    }

    /// `self + c·I`.
    pub fn add_identity(&self, c: f64) -> Self {
        let mut m = self.inner.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += c;
        }
        Self { inner: m }
    }

    /// Plain matrix product; the result is generally not symmetric.
    pub fn mul(&self, other: &SymMatrix) -> DMatrix<f64> {
        &self.inner * &other.inner
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        let p = self.order();
        let mut out = Vec::with_capacity(p * p);
        for i in 0..p {
            for j in 0..p {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }
}

fn check_square_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::InvalidMatrix(format!(
            "expected a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidMatrix("non-finite entry".into()));
    }
    Ok(())
}

/// Eigen-decomposition `A = V diag(d) Vᵀ` with `d` sorted descending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub vectors: DMatrix<f64>,
    pub values: Vec<f64>,
}

impl EigenDecomposition {
    /// `V diag(f(d)) Vᵀ`.
    pub fn reconstruct_with(&self, mut f: impl FnMut(f64) -> f64) -> SymMatrix {
        let mapped: Vec<f64> = self.values.iter().map(|&d| f(d)).collect();
        self.reconstruct_values(&mapped)
    }

    /// `V diag(values) Vᵀ` for replacement eigenvalues.
    pub fn reconstruct_values(&self, values: &[f64]) -> SymMatrix {
        let v = &self.vectors;
        let mut scaled = v.clone();
        for (j, &d) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(d);
        }
        SymMatrix::symmetrize(&scaled * v.transpose())
    }

    pub fn min_value(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |a, &d| a.max(d.abs()))
    }
}

/// Symmetric eigen-decomposition with descending eigenvalues and the first
/// non-negligible component of each eigenvector made positive.
pub fn eig_sym(a: &SymMatrix) -> Result<EigenDecomposition> {
    let p = a.order();
    let eig = SymmetricEigen::try_new(a.inner.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::InvalidMatrix("eigen-decomposition did not converge".into()))?;
    let mut idx: Vec<usize> = (0..p).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let mut vectors = DMatrix::zeros(p, p);
    let mut values = Vec::with_capacity(p);
    for (k, &i) in idx.iter().enumerate() {
        let mut col = eig.eigenvectors.column(i).into_owned();
        if let Some(first) = col.iter().find(|v| v.abs() > SIGN_EPS) {
            if *first < 0.0 {
                col.neg_mut();
            }
        }
        vectors.set_column(k, &col);
        values.push(eig.eigenvalues[i]);
    }
    Ok(EigenDecomposition { vectors, values })
}

/// Default positive-definiteness tolerance for a spectrum.
pub fn pd_tol(values: &[f64]) -> f64 {
    let m = values.iter().fold(0.0_f64, |a, &d| a.max(d.abs()));
    1e-12 * m.max(1.0)
}

fn require_pd(eig: &EigenDecomposition) -> Result<()> {
    let min = eig.min_value();
    if min <= pd_tol(&eig.values) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    Ok(())
}

/// The unique p.d. square root.
pub fn sqrt_pd(a: &SymMatrix) -> Result<SymMatrix> {
    let eig = eig_sym(a)?;
    require_pd(&eig)?;
    Ok(eig.reconstruct_with(f64::sqrt))
}

/// Inverse of a p.d. matrix via its eigen-decomposition.
pub fn inv_pd(a: &SymMatrix) -> Result<SymMatrix> {
    let eig = eig_sym(a)?;
    require_pd(&eig)?;
    Ok(eig.reconstruct_with(f64::recip))
}

/// Log-determinant of a p.d. matrix.
pub fn log_det_pd(a: &SymMatrix) -> Result<f64> {
    let eig = eig_sym(a)?;
    require_pd(&eig)?;
    Ok(eig.values.iter().map(|d| d.ln()).sum())
}

/// True iff the smallest eigenvalue exceeds `tol`.
pub fn is_pd(a: &SymMatrix, tol: f64) -> bool {
    match eig_sym(a) {
        Ok(eig) => eig.min_value() > tol,
        Err(_) => false,
    }
}

/// Smallest eigenvalue.
pub fn min_eigenvalue(a: &SymMatrix) -> Result<f64> {
    Ok(eig_sym(a)?.min_value())
}

/// Spectral norm of a symmetric matrix.
pub fn spectral_norm(a: &SymMatrix) -> Result<f64> {
    Ok(eig_sym(a)?.max_abs_value())
}
