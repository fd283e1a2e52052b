//! Top-K ranking quality: precision, recall and NDCG averaged over the
//! users that hold at least one test interaction.

use crate::dataset::InteractionDataset;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::math;
use crate::model::recommend_topk;
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub k: usize,
    pub precision: f64,
    pub recall: f64,
    pub ndcg: f64,
    pub n_evaluated_users: usize,
}

/// Precision, recall and NDCG of one ranked list against a user's relevant
/// set. `recommended` carries at most `k` items (shorter lists are legal and
/// still divide precision by `k`); `relevant` must be sorted ascending and
/// non-empty.
pub fn metrics_for_user(
    recommended: &[usize],
    relevant: &[usize],
    k: usize,
) -> Result<(f64, f64, f64)> {
    if relevant.is_empty() {
        return Err(Error::EmptyRelevantSet);
    }
    debug_assert!(recommended.len() <= k);
    let mut hits = 0usize;
    let mut dcg = 0.0;
    for (pos, item) in recommended.iter().enumerate() {
        if relevant.binary_search(item).is_ok() {
            hits += 1;
            dcg += 1.0 / math::log2((pos + 2) as f64);
        }
    }
    let ideal_len = k.min(relevant.len());
    let idcg: f64 = (0..ideal_len).map(|p| 1.0 / math::log2((p + 2) as f64)).sum();
    let precision = hits as f64 / k as f64;
    let recall = hits as f64 / relevant.len() as f64;
    let ndcg = dcg / idcg;
    Ok((precision, recall, ndcg))
}

/// Averages per-user metric triples (collected in user order) into a report.
pub fn aggregate(per_user: &[(f64, f64, f64)], k: usize) -> Result<MetricsReport> {
    if per_user.is_empty() {
        return Err(Error::NoTestUsers);
    }
    let count = per_user.len() as f64;
    let mut precision = 0.0;
    let mut recall = 0.0;
    let mut ndcg = 0.0;
    for &(p, r, n) in per_user {
        precision += p;
        recall += r;
        ndcg += n;
    }
    Ok(MetricsReport {
        k,
        precision: precision / count,
        recall: recall / count,
        ndcg: ndcg / count,
        n_evaluated_users: per_user.len(),
    })
}

/// Ranks all items per test user (training items excluded from candidacy)
/// and reports the unweighted metric means over evaluated users.
pub fn evaluate(
    e_star: &DenseMatrix,
    train: &InteractionDataset,
    test: &InteractionDataset,
    k: usize,
) -> Result<MetricsReport> {
    let n_users = train.n_users();
    let mut per_user = Vec::new();
    for u in 0..n_users {
        let relevant = test.items_of(u);
        if relevant.is_empty() {
            continue;
        }
        let recommended = recommend_topk(e_star, u, k, train.items_of(u), n_users)?;
        per_user.push(metrics_for_user(&recommended, relevant, k)?);
    }
    aggregate(&per_user, k)
}
