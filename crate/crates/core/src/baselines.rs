//! Baseline model variants expressed as degenerate configurations of the
//! shared pipeline: BPR-MF is depth-zero scoring on raw embeddings, and
//! LightGCN is interaction-graph-only propagation with the user-user graph
//! emptied. All three share every line of training and evaluation code.

use crate::dataset::InteractionDataset;
use crate::error::Result;
use crate::graph::{
    build_interaction_matrix, build_weighted_user_matrix, normalize_graphs, NormalizedGraphs,
    WeightConfig,
};
use crate::sparse::CsrMatrix;
use crate::trainer::TrainConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelVariant {
    CombiGcn,
    LightGcn,
    BprMf,
}

impl ModelVariant {
    pub fn name(&self) -> &'static str {
        match self {
            ModelVariant::CombiGcn => "combigcn",
            ModelVariant::LightGcn => "lightgcn",
            ModelVariant::BprMf => "bprmf",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "combigcn" => Some(ModelVariant::CombiGcn),
            "lightgcn" => Some(ModelVariant::LightGcn),
            "bprmf" => Some(ModelVariant::BprMf),
            _ => None,
        }
    }
}

/// Builds the propagation graphs and the effective training configuration
/// for a variant. CombiGCN gets the full weighted user-user graph; LightGCN
/// replaces it with an empty matrix; BPR-MF additionally forces zero
/// propagation layers so scores are raw inner products of the trainable
/// embeddings.
pub fn build_variant(
    kind: ModelVariant,
    train: &InteractionDataset,
    cfg: &TrainConfig,
    weight_cfg: &WeightConfig,
) -> Result<(NormalizedGraphs, TrainConfig)> {
    let r = build_interaction_matrix(train);
    let mut effective = cfg.clone();
    let w = match kind {
        ModelVariant::CombiGcn => build_weighted_user_matrix(&r, weight_cfg)?,
        ModelVariant::LightGcn => CsrMatrix::empty(train.n_users(), train.n_users()),
        ModelVariant::BprMf => {
            effective.layers = 0;
            CsrMatrix::empty(train.n_users(), train.n_users())
        }
    };
    let graphs = normalize_graphs(&r, &w)?;
    Ok((graphs, effective))
}
