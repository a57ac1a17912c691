//! Dense symmetric matrix primitives.
//!
//! All norms in this crate are the dimension-normalized ones,
//! `||A||^2 = tr(AA')/p` and `<A,B> = tr(AB')/p`, under which the identity
//! matrix has unit norm for every `p`. The conventional (unnormalized)
//! Frobenius norm is deliberately not exposed so the two cannot be mixed.

use crate::error::{Error, Result};

/// Relative pivot floor applied to the largest diagonal entry during a
/// Cholesky factorization.
pub const DEFAULT_PIVOT_REL_TOL: f64 = 1e-12;

/// A dense `p x p` real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    /// Zero matrix of dimension `dim >= 1`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        SquareMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m.data[i * m.dim + i] = v;
        }
        m
    }

    /// Build from nested rows; every row must have the same length as the
    /// number of rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Domain("matrix must have dimension >= 1".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(SquareMatrix { dim, data })
    }

    pub(crate) fn from_raw(dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        SquareMatrix { dim, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Squared normalized Frobenius norm, `tr(AA')/p`.
    ///
    /// Note the `1/p` factor: `frobenius_norm_sq(I_p) == 1` for every `p`.
    pub fn frobenius_norm_sq(&self) -> f64 {
        let sum: f64 = self.data.iter().map(|v| v * v).sum();
        sum / self.dim as f64
    }

    /// Normalized inner product `tr(A B')/p`.
    pub fn inner_product(&self, other: &SquareMatrix) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let sum: f64 = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum();
        Ok(sum / self.dim as f64)
    }

    /// Plain (unnormalized) sum of squared entries. Used where a trace of a
    /// matrix product is accumulated directly, not as a crate norm.
    pub(crate) fn sum_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn transposed(&self) -> SquareMatrix {
        let p = self.dim;
        let mut out = Self::zeros(p);
        for i in 0..p {
            for j in 0..p {
                out.data[j * p + i] = self.data[i * p + j];
            }
        }
        out
    }

    pub fn matmul(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let p = self.dim;
        let mut out = Self::zeros(p);
        for i in 0..p {
            for k in 0..p {
                let aik = self.data[i * p + k];
                if aik == 0.0 {
                    continue;
                }
                let brow = &other.data[k * p..(k + 1) * p];
                let orow = &mut out.data[i * p..(i + 1) * p];
                for j in 0..p {
                    orow[j] += aik * brow[j];
                }
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> SquareMatrix {
        SquareMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(SquareMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(SquareMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        let p = self.dim;
        for i in 0..p {
            for j in (i + 1)..p {
                let a = self.data[i * p + j];
                let b = self.data[j * p + i];
                if (a - b).abs() > rel_tol * 1.0_f64.max(a.abs()) {
                    return false;
                }
            }
        }
        true
    }

    /// Cholesky factorization `A = L L'` of a symmetric positive definite
    /// matrix, reading the lower triangle. Fails with
    /// [`Error::NotPositiveDefinite`] when a pivot falls at or below
    /// `pivot_tol` before taking its square root.
    pub fn cholesky(&self, pivot_tol: f64) -> Result<Cholesky> {
        let p = self.dim;
        let mut l = vec![0.0; p * p];
        for j in 0..p {
            let mut pivot = self.get(j, j);
            for k in 0..j {
                pivot -= l[j * p + k] * l[j * p + k];
            }
            if pivot <= pivot_tol {
                return Err(Error::NotPositiveDefinite { index: j, pivot });
            }
            let ljj = pivot.sqrt();
            l[j * p + j] = ljj;
            for i in (j + 1)..p {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * p + k] * l[j * p + k];
                }
                l[i * p + j] = s / ljj;
            }
        }
        Ok(Cholesky { dim: p, lower: l })
    }

    /// Scale-relative default pivot tolerance, `1e-12 * max` diagonal entry.
    pub fn default_pivot_tol(&self) -> f64 {
        let max_diag = (0..self.dim).fold(0.0_f64, |m, i| m.max(self.get(i, i)));
        DEFAULT_PIVOT_REL_TOL * max_diag.max(f64::MIN_POSITIVE)
    }

    /// Inverse of a symmetric positive definite matrix via Cholesky solves.
    pub fn spd_inverse(&self) -> Result<SquareMatrix> {
        self.spd_inverse_with_tol(self.default_pivot_tol())
    }

    pub fn spd_inverse_with_tol(&self, pivot_tol: f64) -> Result<SquareMatrix> {
        Ok(self.cholesky(pivot_tol)?.inverse())
    }
}

/// Lower-triangular Cholesky factor of an SPD matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Solve `L y = b` in place.
    fn forward_solve(&self, b: &mut [f64]) {
        let p = self.dim;
        for i in 0..p {
            let mut s = b[i];
            for k in 0..i {
                s -= self.lower[i * p + k] * b[k];
            }
            b[i] = s / self.lower[i * p + i];
        }
    }

    /// Solve `L' x = b` in place.
    fn backward_solve(&self, b: &mut [f64]) {
        let p = self.dim;
        for i in (0..p).rev() {
            let mut s = b[i];
            for k in (i + 1)..p {
                s -= self.lower[k * p + i] * b[k];
            }
            b[i] = s / self.lower[i * p + i];
        }
    }

    /// Solve `A x = b` where `A = L L'`.
    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.dim);
        let mut x = b.to_vec();
        self.forward_solve(&mut x);
        self.backward_solve(&mut x);
        x
    }

    /// Column-wise `L^{-1} B`.
    pub fn forward_solve_matrix(&self, b: &SquareMatrix) -> SquareMatrix {
        let p = self.dim;
        assert_eq!(b.dim(), p);
        let mut col = vec![0.0; p];
        let mut out = SquareMatrix::zeros(p);
        for j in 0..p {
            for i in 0..p {
                col[i] = b.get(i, j);
            }
            self.forward_solve(&mut col);
            for i in 0..p {
                out.set(i, j, col[i]);
            }
        }
        out
    }

    /// `A^{-1}` assembled column by column.
    pub fn inverse(&self) -> SquareMatrix {
        let p = self.dim;
        let mut out = SquareMatrix::zeros(p);
        let mut e = vec![0.0; p];
        for j in 0..p {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            self.forward_solve(&mut e);
            self.backward_solve(&mut e);
            for i in 0..p {
                out.set(i, j, e[i]);
            }
        }
        out
    }
}
