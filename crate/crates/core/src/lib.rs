//! Core engine for CombiGCN, an implicit-feedback recommender that
//! propagates user embeddings over two graphs at once: the user-item
//! interaction graph and a user-user connection graph weighted by the
//! Jaccard similarity of interaction histories. Items propagate over the
//! interaction graph alone. Propagation is light graph convolution (no
//! trainable transforms, no nonlinearities), layer outputs are averaged
//! uniformly, and preferences are scored by inner product.
//!
//! The crate also carries everything needed to run the model end to end:
//! dataset reduction around a popular-item core, per-user train/test
//! splitting, BPR training with analytic gradients and Adam, top-K ranking
//! metrics, and the LightGCN / BPR-MF baselines as degenerate
//! configurations of the same pipeline.
//!
//! `no_std` + `alloc`: the crate is pure computation. IO, file formats and
//! the command-line front end live in the companion `combigcn` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod dataset;
pub mod dense;
pub mod error;
pub mod evaluator;
pub mod graph;
mod math;
pub mod model;
pub mod preprocess;
pub mod rng;
pub mod sparse;
pub mod trainer;

pub use baselines::{build_variant, ModelVariant};
pub use dataset::{ingest, InteractionDataset, RawInteractionLog};
pub use dense::DenseMatrix;
pub use error::{Error, Result};
pub use evaluator::{evaluate, metrics_for_user, MetricsReport};
pub use graph::{
    build_interaction_matrix, build_weighted_user_matrix, normalize_graphs, quantize_weight,
    user_jaccard_matrix, NormalizedGraphs, WeightConfig,
};
pub use model::{
    apply_operator, combine_layers, init_embeddings, predict_score, propagate, recommend_topk,
    EmbeddingTable, PropagationTrace,
};
pub use preprocess::{reduce, score_users, select_core_items, split, PreprocessConfig};
pub use sparse::CsrMatrix;
pub use trainer::{
    adam_step, backward, bpr_loss, sample_epoch, train, train_loop, train_with_progress,
    AdamState, EpochRecord, Gradients, TrainConfig, TrainHistory, TrainTriple,
};
