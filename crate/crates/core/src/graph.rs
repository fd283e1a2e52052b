//! Construction of the two propagation graphs: the binary user-item
//! interaction matrix R and the user-user weighted connection matrix W,
//! followed by the symmetric degree normalization both are consumed under.
//!
//! W starts from the Gram co-occurrence counts R·Rᵀ. Entry (i, j) of the
//! count matrix is the intersection of the two users' item sets, and
//! deg(i) + deg(j) - count is their union, so dividing elementwise yields
//! Jaccard similarity without ever materializing an all-ones matrix. The
//! similarities are then snapped onto a uniform discrete grid in (0, 1].

use crate::dataset::InteractionDataset;
use crate::error::{Error, Result};
use crate::math;
use crate::sparse::CsrMatrix;
use alloc::vec::Vec;

#[derive(Clone, Debug)]
pub struct WeightConfig {
    /// Number of uniform quantization bins for W's values.
    pub quantization_bins: usize,
    /// Drop the diagonal of W (a user's similarity with itself is always 1
    /// and the initial embedding already carries that signal).
    pub drop_self_loops: bool,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self {
            quantization_bins: 10,
            drop_self_loops: true,
        }
    }
}

/// The normalized triple consumed by propagation.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedGraphs {
    /// n x m user-item matrix, degree-normalized.
    pub r_norm: CsrMatrix,
    /// Its m x n transpose, value-for-value.
    pub r_norm_t: CsrMatrix,
    /// n x n user-user matrix, degree-normalized.
    pub w_norm: CsrMatrix,
}

impl NormalizedGraphs {
    pub fn n_users(&self) -> usize {
        self.r_norm.n_rows()
    }

    pub fn n_items(&self) -> usize {
        self.r_norm.n_cols()
    }
}

/// Transfers the interaction set into an n x m binary CSR matrix.
pub fn build_interaction_matrix(train: &InteractionDataset) -> CsrMatrix {
    let n = train.n_users();
    let mut row_ptr = Vec::with_capacity(n + 1);
    row_ptr.push(0usize);
    let mut col_idx = Vec::with_capacity(train.n_interactions());
    for u in 0..n {
        col_idx.extend_from_slice(train.items_of(u));
        row_ptr.push(col_idx.len());
    }
    let values = alloc::vec![1.0; col_idx.len()];
    CsrMatrix::new(n, train.n_items(), row_ptr, col_idx, values)
        .expect("interaction matrix built from a valid dataset")
}

/// Pairwise Jaccard similarity of user item sets, restricted to pairs that
/// share at least one item. Pre-quantization form of W.
pub fn user_jaccard_matrix(r: &CsrMatrix, drop_self_loops: bool) -> Result<CsrMatrix> {
    if !r.is_binary() {
        return Err(Error::NonBinaryMatrix {
            op: "user_jaccard_matrix",
        });
    }
    let counts = r.gram()?;
    let degrees = r.row_sums();
    let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(counts.nnz());
    for (i, j, shared) in counts.iter() {
        if drop_self_loops && i == j {
            continue;
        }
        let union = degrees[i] + degrees[j] - shared;
        entries.push((i, j, shared / union));
    }
    CsrMatrix::from_entries(r.n_rows(), r.n_rows(), &entries)
}

/// Snaps a similarity in (0, 1] to the upper edge of its uniform bin:
/// `ceil(v * bins) / bins`. The top bin maps to exactly 1.0 and no nonzero
/// similarity can collapse to 0.
pub fn quantize_weight(v: f64, bins: usize) -> Result<f64> {
    if bins < 1 {
        return Err(Error::InvalidConfig(alloc::string::String::from(
            "quantization_bins must be at least 1",
        )));
    }
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::WeightOutOfDomain { value: v });
    }
    Ok(math::ceil(v * bins as f64) / bins as f64)
}

/// Full W construction: Jaccard similarities, optional self-loop removal,
/// quantization.
pub fn build_weighted_user_matrix(r: &CsrMatrix, cfg: &WeightConfig) -> Result<CsrMatrix> {
    let raw = user_jaccard_matrix(r, cfg.drop_self_loops)?;
    let entries: Vec<(usize, usize, f64)> = raw
        .iter()
        .map(|(i, j, v)| Ok((i, j, quantize_weight(v, cfg.quantization_bins)?)))
        .collect::<Result<_>>()?;
    CsrMatrix::from_entries(raw.n_rows(), raw.n_cols(), &entries)
}

/// Degree-normalizes R against user/item interaction counts and W against
/// its weighted row sums. The transpose side reuses r_norm's values, so the
/// two stay equal value-for-value by construction.
pub fn normalize_graphs(r: &CsrMatrix, w: &CsrMatrix) -> Result<NormalizedGraphs> {
    if w.n_rows() != r.n_rows() || w.n_cols() != r.n_rows() {
        return Err(Error::DimensionMismatch {
            op: "normalize_graphs",
            left_rows: r.n_rows(),
            left_cols: r.n_cols(),
            right_rows: w.n_rows(),
            right_cols: w.n_cols(),
        });
    }
    let user_deg = r.row_sums();
    let item_deg = r.col_sums();
    let w_deg = w.row_sums();
    let r_norm = r.sym_normalize(&user_deg, &item_deg)?;
    let r_norm_t = r_norm.transpose();
    let w_norm = w.sym_normalize(&w_deg, &w_deg)?;
    Ok(NormalizedGraphs {
        r_norm,
        r_norm_t,
        w_norm,
    })
}
