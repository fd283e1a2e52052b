//! The embedding model: seeded initialization, L rounds of linear
//! propagation over the two normalized graphs, uniform layer combination
//! and inner-product scoring.
//!
//! One propagation round maps the stacked embedding X = [users ; items] to
//!
//! ```text
//! users' = r_norm  * items + w_norm * users
//! items' = r_norm_t * users
//! ```
//!
//! which is exactly the symmetric block operator A = [[W, R], [Rt, 0]]
//! applied to X. There are no trainable transforms and no nonlinearities,
//! so the whole forward pass is linear in the initial embedding.

use crate::dense::{dot, DenseMatrix};
use crate::error::{Error, Result};
use crate::graph::NormalizedGraphs;
use crate::rng::Rng;
use alloc::vec::Vec;

/// The trainable parameters: one d-dimensional row per user and per item.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    user_embed: DenseMatrix,
    item_embed: DenseMatrix,
}

impl EmbeddingTable {
    pub fn from_parts(user_embed: DenseMatrix, item_embed: DenseMatrix) -> Result<Self> {
        if user_embed.n_cols() != item_embed.n_cols() {
            return Err(Error::DimensionMismatch {
                op: "embedding table",
                left_rows: user_embed.n_rows(),
                left_cols: user_embed.n_cols(),
                right_rows: item_embed.n_rows(),
                right_cols: item_embed.n_cols(),
            });
        }
        Ok(Self {
            user_embed,
            item_embed,
        })
    }

    pub fn n_users(&self) -> usize {
        self.user_embed.n_rows()
    }

    pub fn n_items(&self) -> usize {
        self.item_embed.n_rows()
    }

    pub fn dim(&self) -> usize {
        self.user_embed.n_cols()
    }

    pub fn user_embed(&self) -> &DenseMatrix {
        &self.user_embed
    }

    pub fn item_embed(&self) -> &DenseMatrix {
        &self.item_embed
    }

    pub fn user_embed_mut(&mut self) -> &mut DenseMatrix {
        &mut self.user_embed
    }

    pub fn item_embed_mut(&mut self) -> &mut DenseMatrix {
        &mut self.item_embed
    }

    /// User rows stacked over item rows: the (n + m) x d layer-0 embedding.
    pub fn stacked(&self) -> DenseMatrix {
        DenseMatrix::vstack(&self.user_embed, &self.item_embed)
            .expect("user and item embeddings share a dimension")
    }

    /// Sum of squares over every parameter; the L2 regularization term.
    pub fn norm_sq(&self) -> f64 {
        self.user_embed.frob_norm_sq() + self.item_embed.frob_norm_sq()
    }
}

/// All intermediate layer embeddings of one forward pass plus their uniform
/// average. Layer 0 is the initial embedding.
#[derive(Clone, Debug)]
pub struct PropagationTrace {
    pub layers: Vec<DenseMatrix>,
    pub final_embed: DenseMatrix,
    pub alpha: f64,
}

impl PropagationTrace {
    pub fn n_layers(&self) -> usize {
        self.layers.len() - 1
    }
}

/// Draws every embedding entry from N(0, 0.1) with a seeded generator; the
/// same seed reproduces the table bit for bit.
pub fn init_embeddings(n_users: usize, n_items: usize, dim: usize, seed: u64) -> EmbeddingTable {
    assert!(n_users >= 1 && n_items >= 1 && dim >= 1);
    let mut rng = Rng::with_stream(seed, 0x696e6974); // "init"
    let user_data = rng.sample_normals(n_users * dim, 0.0, 0.1);
    let item_data = rng.sample_normals(n_items * dim, 0.0, 0.1);
    EmbeddingTable {
        user_embed: DenseMatrix::from_vec(n_users, dim, user_data).expect("sized by construction"),
        item_embed: DenseMatrix::from_vec(n_items, dim, item_data).expect("sized by construction"),
    }
}

/// One application of the propagation operator to a stacked (n + m) x d
/// matrix. Empty graphs contribute nothing (no floating-point work), so a
/// zeroed W leaves the user block exactly equal to the plain interaction
/// propagation.
pub fn apply_operator(g: &NormalizedGraphs, x: &DenseMatrix) -> Result<DenseMatrix> {
    let n = g.n_users();
    let m = g.n_items();
    if x.n_rows() != n + m {
        return Err(Error::DimensionMismatch {
            op: "apply_operator",
            left_rows: n + m,
            left_cols: x.n_cols(),
            right_rows: x.n_rows(),
            right_cols: x.n_cols(),
        });
    }
    let mut out = DenseMatrix::zeros(n + m, x.n_cols());
    // users' = r_norm * items + w_norm * users
    g.r_norm.spmm_block(x, n, &mut out, 0);
    g.w_norm.spmm_block(x, 0, &mut out, 0);
    // items' = r_norm_t * users
    g.r_norm_t.spmm_block(x, 0, &mut out, n);
    Ok(out)
}

/// Runs `n_layers` propagation rounds from the initial embedding, recording
/// every layer and the combined final embedding.
pub fn propagate(
    e0: &EmbeddingTable,
    g: &NormalizedGraphs,
    n_layers: usize,
) -> Result<PropagationTrace> {
    if e0.n_users() != g.n_users() || e0.n_items() != g.n_items() {
        return Err(Error::DimensionMismatch {
            op: "propagate",
            left_rows: e0.n_users(),
            left_cols: e0.n_items(),
            right_rows: g.n_users(),
            right_cols: g.n_items(),
        });
    }
    let mut layers = Vec::with_capacity(n_layers + 1);
    layers.push(e0.stacked());
    for _ in 0..n_layers {
        let next = apply_operator(g, layers.last().expect("layer list starts non-empty"))?;
        layers.push(next);
    }
    let final_embed = combine_layers(&layers)?;
    Ok(PropagationTrace {
        final_embed,
        alpha: 1.0 / layers.len() as f64,
        layers,
    })
}

/// Uniform average of the layer embeddings. A single layer passes through
/// unchanged.
pub fn combine_layers(layers: &[DenseMatrix]) -> Result<DenseMatrix> {
    match layers {
        [] => Err(Error::EmptyLayerList),
        [only] => Ok(only.clone()),
        [first, rest @ ..] => {
            let mut acc = first.clone();
            for layer in rest {
                acc.add_assign(layer);
            }
            acc.scale(1.0 / layers.len() as f64);
            Ok(acc)
        }
    }
}

/// Inner product of user row `u` and item row `n_users + i`.
pub fn predict_score(e_star: &DenseMatrix, u: usize, i: usize, n_users: usize) -> Result<f64> {
    if u >= n_users {
        return Err(Error::IndexOutOfRange {
            kind: "user",
            index: u,
            bound: n_users,
        });
    }
    let n_items = e_star.n_rows() - n_users;
    if i >= n_items {
        return Err(Error::IndexOutOfRange {
            kind: "item",
            index: i,
            bound: n_items,
        });
    }
    Ok(dot(e_star.row(u), e_star.row(n_users + i)))
}

/// Scores every item for user `u`, drops the excluded ids (training items),
/// and returns up to `k` item ids by descending score, ties broken by
/// ascending id. `exclude` must be sorted ascending.
pub fn recommend_topk(
    e_star: &DenseMatrix,
    u: usize,
    k: usize,
    exclude: &[usize],
    n_users: usize,
) -> Result<Vec<usize>> {
    debug_assert!(k >= 1);
    debug_assert!(exclude.windows(2).all(|w| w[0] < w[1]));
    if u >= n_users {
        return Err(Error::IndexOutOfRange {
            kind: "user",
            index: u,
            bound: n_users,
        });
    }
    let n_items = e_star.n_rows() - n_users;
    let user_row = e_star.row(u);
    let mut scored: Vec<(usize, f64)> = (0..n_items)
        .filter(|i| exclude.binary_search(i).is_err())
        .map(|i| (i, dot(user_row, e_star.row(n_users + i))))
        .collect();
    scored.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored.into_iter().map(|(i, _)| i).collect())
}
