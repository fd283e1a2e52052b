//! Compressed sparse row matrices and the kernels the propagation layers
//! are built on: sparse-dense multiply, transpose, binary Gram product and
//! symmetric degree normalization.
//!
//! All arithmetic is f64. Values are validated finite at construction, so
//! downstream kernels never have to re-check for NaN poisoning.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::math;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a CSR matrix from raw arrays, validating the structural
    /// invariants: monotone row pointers, strictly increasing column indices
    /// within each row, in-bounds columns and finite values.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 {
            return Err(Error::InvalidCsr(format!(
                "row_ptr length {} for {} rows (expected {})",
                row_ptr.len(),
                n_rows,
                n_rows + 1
            )));
        }
        if row_ptr[0] != 0 {
            return Err(Error::InvalidCsr(format!(
                "row_ptr[0] is {}, expected 0",
                row_ptr[0]
            )));
        }
        if col_idx.len() != values.len() {
            return Err(Error::InvalidCsr(format!(
                "{} column indices but {} values",
                col_idx.len(),
                values.len()
            )));
        }
        if row_ptr[n_rows] != col_idx.len() {
            return Err(Error::InvalidCsr(format!(
                "row_ptr[{}] is {}, expected nnz {}",
                n_rows,
                row_ptr[n_rows],
                col_idx.len()
            )));
        }
        for r in 0..n_rows {
            if row_ptr[r] > row_ptr[r + 1] {
                return Err(Error::InvalidCsr(format!(
                    "row_ptr decreases at row {}: {} > {}",
                    r,
                    row_ptr[r],
                    row_ptr[r + 1]
                )));
            }
            let cols = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            for pair in cols.windows(2) {
                if pair[0] >= pair[1] {
                    return Err(Error::InvalidCsr(format!(
                        "columns not strictly increasing in row {r}"
                    )));
                }
            }
        }
        for &c in &col_idx {
            if c >= n_cols {
                return Err(Error::InvalidCsr(format!(
                    "column index {c} out of bounds for {n_cols} columns"
                )));
            }
        }
        for &v in &values {
            if !v.is_finite() {
                return Err(Error::InvalidCsr(format!("non-finite stored value {v}")));
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Matrix with no stored entries.
    pub fn empty(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds from (row, col, value) triples; duplicates are rejected.
    pub fn from_entries(n_rows: usize, n_cols: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = entries.to_vec();
        sorted.sort_unstable_by_key(|e| (e.0, e.1));
        for pair in sorted.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(Error::InvalidCsr(format!(
                    "duplicate entry at ({}, {})",
                    pair[0].0, pair[0].1
                )));
            }
        }
        let mut row_ptr = vec![0usize; n_rows + 1];
        for &(r, _, _) in &sorted {
            if r >= n_rows {
                return Err(Error::InvalidCsr(format!(
                    "row index {r} out of bounds for {n_rows} rows"
                )));
            }
            row_ptr[r + 1] += 1;
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        let col_idx = sorted.iter().map(|e| e.1).collect();
        let values = sorted.iter().map(|e| e.2).collect();
        Self::new(n_rows, n_cols, row_ptr, col_idx, values)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(pos) => vals[pos],
            Err(_) => 0.0,
        }
    }

    /// Iterates stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals.iter()).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_rows];
        for (r, _, v) in self.iter() {
            sums[r] += v;
        }
        sums
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_cols];
        for (_, c, v) in self.iter() {
            sums[c] += v;
        }
        sums
    }

    /// True when every stored value is exactly 1.0.
    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 1.0)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (r, c, v) in self.iter() {
            out.set(r, c, v);
        }
        out
    }

    /// Sparse-dense product `self * x`.
    pub fn spmm(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if self.n_cols != x.n_rows() {
            return Err(Error::DimensionMismatch {
                op: "spmm",
                left_rows: self.n_rows,
                left_cols: self.n_cols,
                right_rows: x.n_rows(),
                right_cols: x.n_cols(),
            });
        }
        let mut out = DenseMatrix::zeros(self.n_rows, x.n_cols());
        self.spmm_block(x, 0, &mut out, 0);
        Ok(out)
    }

    /// Accumulates `self * x[x_row0..x_row0 + n_cols]` into
    /// `out[out_row0..out_row0 + n_rows]`. An empty matrix performs no
    /// floating-point work at all, which keeps degenerate graphs bit-identical
    /// to their reduced counterparts.
    pub(crate) fn spmm_block(
        &self,
        x: &DenseMatrix,
        x_row0: usize,
        out: &mut DenseMatrix,
        out_row0: usize,
    ) {
        debug_assert!(x_row0 + self.n_cols <= x.n_rows());
        debug_assert!(out_row0 + self.n_rows <= out.n_rows());
        debug_assert_eq!(x.n_cols(), out.n_cols());
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            if cols.is_empty() {
                continue;
            }
            // Split borrow: out row is disjoint from x.
            let out_row = out.row_mut(out_row0 + r);
            for (&c, &v) in cols.iter().zip(vals.iter()) {
                let x_row = x.row(x_row0 + c);
                for (o, xv) in out_row.iter_mut().zip(x_row.iter()) {
                    *o += v * xv;
                }
            }
        }
    }

    /// Transpose into a fresh CSR matrix. Values are moved untouched, so
    /// `transpose(transpose(a)) == a` bit-exactly.
    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for c in 0..self.n_cols {
            counts[c + 1] += counts[c];
        }
        let row_ptr = counts.clone();
        let mut cursor = counts;
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for (r, c, v) in self.iter() {
            let slot = cursor[c];
            col_idx[slot] = r;
            values[slot] = v;
            cursor[c] += 1;
        }
        CsrMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Gram product `self * self^T` for a binary matrix: entry (i, j) counts
    /// the columns shared by rows i and j, so the diagonal carries row
    /// degrees. Rejects non-binary input, where co-occurrence counting is
    /// meaningless.
    pub fn gram(&self) -> Result<CsrMatrix> {
        if !self.is_binary() {
            return Err(Error::NonBinaryMatrix { op: "gram" });
        }
        let transposed = self.transpose();
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        row_ptr.push(0usize);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut counts = vec![0u32; self.n_rows];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.n_rows {
            let (cols, _) = self.row(r);
            for &c in cols {
                let (users, _) = transposed.row(c);
                for &other in users {
                    if counts[other] == 0 {
                        touched.push(other);
                    }
                    counts[other] += 1;
                }
            }
            touched.sort_unstable();
            for &other in &touched {
                col_idx.push(other);
                values.push(counts[other] as f64);
                counts[other] = 0;
            }
            touched.clear();
            row_ptr.push(col_idx.len());
        }
        Ok(CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Scales entry (i, j) by `1 / (sqrt(row_deg[i]) * sqrt(col_deg[j]))`.
    /// Entries incident to a zero degree are dropped: isolated nodes
    /// propagate nothing.
    pub fn sym_normalize(&self, row_deg: &[f64], col_deg: &[f64]) -> Result<CsrMatrix> {
        if row_deg.len() != self.n_rows {
            return Err(Error::LengthMismatch {
                what: "row degrees",
                expected: self.n_rows,
                got: row_deg.len(),
            });
        }
        if col_deg.len() != self.n_cols {
            return Err(Error::LengthMismatch {
                what: "column degrees",
                expected: self.n_cols,
                got: col_deg.len(),
            });
        }
        for degrees in [row_deg, col_deg] {
            for (idx, &d) in degrees.iter().enumerate() {
                if d < 0.0 || d.is_nan() {
                    return Err(Error::NegativeDegree {
                        index: idx,
                        value: d,
                    });
                }
            }
        }
        let inv_row: Vec<f64> = row_deg
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / math::sqrt(d) } else { 0.0 })
            .collect();
        let inv_col: Vec<f64> = col_deg
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / math::sqrt(d) } else { 0.0 })
            .collect();
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        row_ptr.push(0usize);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for (r, &inv_r) in inv_row.iter().enumerate() {
            let (cols, vals) = self.row(r);
            if inv_r > 0.0 {
                for (&c, &v) in cols.iter().zip(vals.iter()) {
                    if inv_col[c] > 0.0 {
                        col_idx.push(c);
                        values.push(v * inv_r * inv_col[c]);
                    }
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> CsrMatrix {
        let n_rows = rows.len();
        let n_cols = rows[0].len();
        let mut entries = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    entries.push((r, c, v));
                }
            }
        }
        CsrMatrix::from_entries(n_rows, n_cols, &entries).unwrap()
    }

    #[test]
    fn spmm_identity_is_noop() {
        let a = CsrMatrix::identity(2);
        let x = DenseMatrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let y = a.spmm(&x).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn spmm_permutation_swaps_rows() {
        let a = matrix(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let x = DenseMatrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let y = a.spmm(&x).unwrap();
        assert_eq!(y.row(0), &[3.0, 4.0]);
        assert_eq!(y.row(1), &[1.0, 2.0]);
    }

    #[test]
    fn spmm_rejects_dimension_mismatch() {
        let a = CsrMatrix::identity(2);
        let x = DenseMatrix::zeros(3, 2);
        let err = a.spmm(&x).unwrap_err();
        match err {
            Error::DimensionMismatch {
                left_cols,
                right_rows,
                ..
            } => {
                assert_eq!(left_cols, 2);
                assert_eq!(right_rows, 3);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn transpose_hand_case() {
        let a = matrix(&[&[1.0, 0.0], &[1.0, 1.0]]);
        let t = a.transpose();
        assert_eq!(t.get(0, 0), 1.0);
        assert_eq!(t.get(0, 1), 1.0);
        assert_eq!(t.get(1, 0), 0.0);
        assert_eq!(t.get(1, 1), 1.0);
    }

    #[test]
    fn transpose_fixes_diagonal() {
        let d = matrix(&[&[2.0, 0.0], &[0.0, 3.0]]);
        assert_eq!(d.transpose(), d);
    }

    #[test]
    fn gram_counts_shared_columns() {
        let r = matrix(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let g = r.gram().unwrap();
        assert_eq!(g.get(0, 0), 2.0);
        assert_eq!(g.get(0, 1), 1.0);
        assert_eq!(g.get(1, 0), 1.0);
        assert_eq!(g.get(1, 1), 1.0);
    }

    #[test]
    fn gram_disjoint_rows_have_zero_offdiagonal() {
        let r = matrix(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 1.0]]);
        let g = r.gram().unwrap();
        assert_eq!(g.get(0, 1), 0.0);
        assert_eq!(g.get(1, 0), 0.0);
    }

    #[test]
    fn gram_rejects_non_binary() {
        let r = matrix(&[&[2.0]]);
        assert!(matches!(
            r.gram().unwrap_err(),
            Error::NonBinaryMatrix { .. }
        ));
    }

    #[test]
    fn sym_normalize_single_edge() {
        let r = matrix(&[&[1.0]]);
        let n = r.sym_normalize(&[1.0], &[1.0]).unwrap();
        assert_eq!(n.get(0, 0), 1.0);
    }

    #[test]
    #[allow(clippy::approx_constant)] // 0.70711 is the frozen expected value
    fn sym_normalize_hand_case() {
        let r = matrix(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let n = r.sym_normalize(&[2.0, 1.0], &[1.0, 2.0]).unwrap();
        assert!((n.get(0, 0) - 0.70711).abs() < 1e-5);
        assert!((n.get(0, 1) - 0.5).abs() < 1e-5);
        assert_eq!(n.get(1, 0), 0.0);
        assert!((n.get(1, 1) - 0.70711).abs() < 1e-5);
    }

    #[test]
    fn sym_normalize_zero_degree_row_is_dropped() {
        let r = matrix(&[&[1.0, 1.0], &[1.0, 0.0]]);
        let n = r.sym_normalize(&[0.0, 1.0], &[1.0, 1.0]).unwrap();
        let (cols, _) = n.row(0);
        assert!(cols.is_empty());
        assert_eq!(n.get(1, 0), 1.0);
    }

    #[test]
    fn sym_normalize_all_ones_degrees_is_identity_on_values() {
        let r = matrix(&[&[0.25, 0.5], &[0.0, 0.75]]);
        let n = r.sym_normalize(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(n, r);
    }

    #[test]
    fn sym_normalize_rejects_negative_degree() {
        let r = matrix(&[&[1.0]]);
        assert!(matches!(
            r.sym_normalize(&[-1.0], &[1.0]).unwrap_err(),
            Error::NegativeDegree { .. }
        ));
    }

    #[test]
    fn sym_normalize_rejects_length_mismatch() {
        let r = matrix(&[&[1.0]]);
        assert!(matches!(
            r.sym_normalize(&[1.0, 1.0], &[1.0]).unwrap_err(),
            Error::LengthMismatch { .. }
        ));
    }

    #[test]
    fn new_rejects_broken_structure() {
        // row_ptr not ending at nnz
        assert!(CsrMatrix::new(1, 2, vec![0, 2], vec![0], vec![1.0]).is_err());
        // decreasing row_ptr
        assert!(CsrMatrix::new(2, 2, vec![0, 1, 0], vec![0], vec![1.0]).is_err());
        // duplicate column in a row
        assert!(CsrMatrix::new(1, 2, vec![0, 2], vec![1, 1], vec![1.0, 1.0]).is_err());
        // column out of bounds
        assert!(CsrMatrix::new(1, 2, vec![0, 1], vec![2], vec![1.0]).is_err());
        // non-finite value
        assert!(CsrMatrix::new(1, 1, vec![0, 1], vec![0], vec![f64::NAN]).is_err());
    }

    #[test]
    fn from_entries_rejects_duplicates() {
        let err = CsrMatrix::from_entries(2, 2, &[(0, 0, 1.0), (0, 0, 2.0)]).unwrap_err();
        assert!(matches!(err, Error::InvalidCsr(_)));
    }
}
