//! Small dense square matrices and Cholesky factorization.
//!
//! Covariances here are a few dimensions wide, so a row-major `Vec` and an
//! unblocked factorization are enough. Everything that needs `Σ⁻¹` goes
//! through [`Cholesky`] solves instead of an explicit inverse.

use serde::{Deserialize, Serialize};

use crate::error::{DivergenceError, Result};
use crate::scalar::Scalar;

/// Square matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<T>>", into = "Vec<Vec<T>>")]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn diagonal(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(DivergenceError::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Self { n, data })
    }

    pub fn from_row_major(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(DivergenceError::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    /// Symmetric to within `tol·max(1, max|a_ij|)`.
    pub fn is_symmetric(&self, tol: T) -> bool {
        let scale = self.max_abs().max(T::one());
        (0..self.n).all(|i| {
            (i + 1..self.n).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol * scale)
        })
    }

    /// `(A + Aᵀ)/2`.
    pub fn symmetrized(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let v = T::half() * (self[(i, j)] + self[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-T::one()))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| (0..self.n).fold(T::zero(), |acc, j| acc + self[(i, j)] * v[j]))
            .collect()
    }

    /// `Σ_ij a_ij b_ij`, i.e. `tr(Bᵀ A)`.
    pub fn frobenius_dot(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn cholesky(&self) -> Result<Cholesky<T>> {
        let n = self.n;
        let mut l = Self::zeros(n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d = d - l[(j, k)] * l[(j, k)];
            }
            if !(d > T::zero()) || !d.is_finite() {
                return Err(DivergenceError::NotPositiveDefinite);
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Cholesky { l })
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

impl<T: Scalar> TryFrom<Vec<Vec<T>>> for Matrix<T> {
    type Error = DivergenceError;
    fn try_from(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl<T: Scalar> From<Matrix<T>> for Vec<Vec<T>> {
    fn from(m: Matrix<T>) -> Self {
        m.rows()
    }
}

/// Lower-triangular factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky<T> {
    l: Matrix<T>,
}

impl<T: Scalar> Cholesky<T> {
    pub fn factor(&self) -> &Matrix<T> {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.n
    }

    /// `log |A|`.
    pub fn log_det(&self) -> T {
        T::two() * (0..self.l.n).fold(T::zero(), |acc, i| acc + self.l[(i, i)].ln())
    }

    /// `L⁻¹ b`.
    #[allow(clippy::needless_range_loop)]
    pub fn forward(&self, b: &[T]) -> Vec<T> {
        let n = self.l.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s = s - self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    /// `A⁻¹ b`.
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.l.n;
        let mut x = self.forward(b);
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s = s - self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    /// `A⁻¹ B`, column by column.
    pub fn solve_matrix(&self, b: &Matrix<T>) -> Matrix<T> {
        let n = self.l.n;
        let mut out = Matrix::zeros(n);
        for j in 0..n {
            let col: Vec<T> = (0..n).map(|i| b[(i, j)]).collect();
            for (i, v) in self.solve(&col).into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    /// `vᵀ A⁻¹ v = ‖L⁻¹ v‖²`.
    pub fn quad_form(&self, v: &[T]) -> T {
        self.forward(v).iter().fold(T::zero(), |acc, &y| acc + y * y)
    }

    /// Explicit `A⁻¹`, symmetrized.
    pub fn inverse(&self) -> Matrix<T> {
        self.solve_matrix(&Matrix::identity(self.l.n)).symmetrized()
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn axpby<T: Scalar>(alpha: T, a: &[T], beta: T, b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| alpha * x + beta * y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spd() -> Matrix<f64> {
        Matrix::from_rows(vec![
            vec![4.0, 1.2, -0.4],
            vec![1.2, 3.0, 0.5],
            vec![-0.4, 0.5, 2.0],
        ])
        .unwrap()
    }

    #[test]
    fn agrees_with_nalgebra() {
        let a = spd();
        let na = nalgebra::DMatrix::from_row_slice(3, 3, &a.rows().concat());
        let ch = a.cholesky().unwrap();
        assert_relative_eq!(ch.log_det(), na.determinant().ln(), max_relative = 1e-14);
        let inv = ch.inverse();
        let ninv = na.clone().try_inverse().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(inv[(i, j)], ninv[(i, j)], max_relative = 1e-13);
            }
        }
        let b = [1.0, -2.0, 0.5];
        let x = ch.solve(&b);
        let ax = a.matvec(&x);
        for i in 0..3 {
            assert_relative_eq!(ax[i], b[i], max_relative = 1e-14);
        }
        assert_relative_eq!(ch.quad_form(&b), dot(&b, &x), max_relative = 1e-14);
    }

    #[test]
    fn rejects_indefinite() {
        let a = Matrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert_eq!(a.cholesky().unwrap_err(), DivergenceError::NotPositiveDefinite);
        assert!(Matrix::<f64>::from_rows(vec![vec![1.0, 2.0], vec![2.0]]).is_err());
    }

    #[test]
    fn nested_rows_round_trip() {
        let rows = vec![vec![2.0, 0.5], vec![0.5, 1.0]];
        let m = Matrix::<f64>::try_from(rows.clone()).unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m[(0, 1)], 0.5);
        assert_eq!(Vec::<Vec<f64>>::from(m), rows);
    }
}
