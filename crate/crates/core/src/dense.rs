//! Row-major dense matrices carrying embeddings and gradients.

use crate::error::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn from_vec(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::LengthMismatch {
                what: "dense matrix data",
                expected: n_rows * n_cols,
                got: data.len(),
            });
        }
        Ok(Self {
            n_rows,
            n_cols,
            data,
        })
    }

    /// Stacks `top` over `bottom`; both must share a column count.
    pub fn vstack(top: &DenseMatrix, bottom: &DenseMatrix) -> Result<DenseMatrix> {
        if top.n_cols != bottom.n_cols {
            return Err(Error::DimensionMismatch {
                op: "vstack",
                left_rows: top.n_rows,
                left_cols: top.n_cols,
                right_rows: bottom.n_rows,
                right_cols: bottom.n_cols,
            });
        }
        let mut data = Vec::with_capacity((top.n_rows + bottom.n_rows) * top.n_cols);
        data.extend_from_slice(&top.data);
        data.extend_from_slice(&bottom.data);
        Ok(DenseMatrix {
            n_rows: top.n_rows + bottom.n_rows,
            n_cols: top.n_cols,
            data,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_cols + j] = v;
    }

    /// Copies rows `[start, start + len)` into a new matrix.
    pub fn rows(&self, start: usize, len: usize) -> DenseMatrix {
        DenseMatrix {
            n_rows: len,
            n_cols: self.n_cols,
            data: self.data[start * self.n_cols..(start + len) * self.n_cols].to_vec(),
        }
    }

    pub fn same_shape(&self, other: &DenseMatrix) -> bool {
        self.n_rows == other.n_rows && self.n_cols == other.n_cols
    }

    pub fn add_assign(&mut self, other: &DenseMatrix) {
        assert!(self.same_shape(other), "add_assign: shape mismatch");
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
    }

    pub fn add_scaled(&mut self, other: &DenseMatrix, scale: f64) {
        assert!(self.same_shape(other), "add_scaled: shape mismatch");
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += scale * b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for a in self.data.iter_mut() {
            *a *= s;
        }
    }

    pub fn frob_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert!(self.same_shape(other), "max_abs_diff: shape mismatch");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Frobenius inner product of two equally shaped matrices.
pub fn inner(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    assert!(a.same_shape(b), "inner: shape mismatch");
    dot(a.data(), b.data())
}
