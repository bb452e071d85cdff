//! Dense row-major matrices and column-stochastic checks.

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// Dense row-major matrix. Conditional probability tables are stored with one
/// column per conditioning event, so `entry(i, j) = Pr(row i | column j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::DimensionMismatch {
                    context: format!("matrix row {i}"),
                    expected: n_cols,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Self {
            rows: n_rows,
            cols: n_cols,
            data,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = T::one();
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    /// A single all-ones row: every column maps to the one outcome with certainty.
    pub fn ones_row(cols: usize) -> Self {
        Self {
            rows: 1,
            cols,
            data: vec![T::one(); cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, row: usize, col: usize) -> &T {
        &self.data[row * self.cols + col]
    }

    pub fn entry_mut(&mut self, row: usize, col: usize) -> &mut T {
        &mut self.data[row * self.cols + col]
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = &T> + '_ {
        (0..self.rows).map(move |r| self.entry(r, col))
    }

    pub fn column_sum(&self, col: usize) -> T {
        scalar::sum(self.column(col).cloned())
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.cols.max(1)).map(<[T]>::to_vec).collect()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn is_all_ones_row(&self) -> bool {
        self.rows == 1 && self.data.iter().all(|v| v.is_one())
    }

    /// `self · x`.
    pub fn mul_vec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "matrix-vector product".into(),
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok(self
            .data
            .chunks(self.cols.max(1))
            .take(self.rows)
            .map(|row| {
                row.iter()
                    .zip(x)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect())
    }

    /// `vᵀ · self`.
    pub fn left_mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "vector-matrix product".into(),
                expected: self.rows,
                found: v.len(),
            });
        }
        Ok((0..self.cols)
            .map(|c| {
                self.column(c)
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect())
    }

    /// Index of the first column failing the stochastic test, with its sum.
    pub fn first_non_stochastic_column(&self, tol: &T) -> Option<(usize, T)> {
        (0..self.cols).find_map(|c| {
            let sum = self.column_sum(c);
            let entries_ok = self.column(c).all(Scalar::in_unit_interval);
            let sum_ok = (sum.clone() - T::one()).abs() <= *tol;
            (!entries_ok || !sum_ok).then_some((c, sum))
        })
    }
}

/// True iff the matrix is non-empty, every entry lies in `[0, 1]`, and every
/// column sums to one within `tol`.
pub fn is_column_stochastic<T: Scalar>(m: &Matrix<T>, tol: &T) -> bool {
    m.rows() > 0 && m.cols() > 0 && m.first_non_stochastic_column(tol).is_none()
}

/// True iff `v` is a probability vector within `tol`.
pub fn is_probability_vector<T: Scalar>(v: &[T], tol: &T) -> bool {
    !v.is_empty()
        && v.iter().all(Scalar::in_unit_interval)
        && (scalar::sum(v.iter().cloned()) - T::one()).abs() <= *tol
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "dot product".into(),
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone()))
}
