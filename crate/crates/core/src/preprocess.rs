//! Dataset reduction and train/test splitting.
//!
//! The reduction pass keeps a dense core of the most popular items and the
//! users whose interaction history best overlaps that core, then drops users
//! left with too few core interactions. The result is a compact dataset with
//! strong item overlap between users, which is what the user-user similarity
//! graph feeds on.

use crate::dataset::InteractionDataset;
use crate::error::{Error, Result};
use crate::math;
use crate::rng::Rng;
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

#[derive(Clone, Debug)]
pub struct PreprocessConfig {
    /// Number of most-popular items to anchor the reduction.
    pub core_item_count: usize,
    /// Target ratio of retained users to core items.
    pub user_item_ratio: f64,
    /// A user survives only with strictly more core interactions than this.
    pub min_user_interactions: usize,
}

const SPLIT_STREAM: u64 = 0x73706c69; // "spli"

impl PreprocessConfig {
    pub fn new(core_item_count: usize, user_item_ratio: f64) -> Self {
        Self {
            core_item_count,
            user_item_ratio,
            min_user_interactions: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.core_item_count < 1 {
            return Err(Error::InvalidConfig(
                "core_item_count must be at least 1".to_string(),
            ));
        }
        if !self.user_item_ratio.is_finite() || self.user_item_ratio <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "user_item_ratio must be a positive finite number, got {}",
                self.user_item_ratio
            )));
        }
        if self.min_user_interactions < 1 {
            return Err(Error::InvalidConfig(
                "min_user_interactions must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// The `core_count` items with the most interacting users, ties broken by
/// smaller item id. Returned sorted ascending.
pub fn select_core_items(ds: &InteractionDataset, core_count: usize) -> Result<Vec<usize>> {
    if core_count < 1 || core_count > ds.n_items() {
        return Err(Error::CoreItemCountOutOfRange {
            requested: core_count,
            n_items: ds.n_items(),
        });
    }
    let degrees = ds.item_degrees();
    let mut order: Vec<usize> = (0..ds.n_items()).collect();
    order.sort_unstable_by(|&a, &b| degrees[b].cmp(&degrees[a]).then(a.cmp(&b)));
    let mut core = order[..core_count].to_vec();
    core.sort_unstable();
    Ok(core)
}

/// Jaccard similarity of each user's item set against the core set:
/// |set_u ∩ core| / |set_u ∪ core|.
pub fn score_users(ds: &InteractionDataset, core: &[usize]) -> Vec<f64> {
    debug_assert!(!core.is_empty());
    (0..ds.n_users())
        .map(|u| {
            let items = ds.items_of(u);
            let inter = sorted_intersection_len(items, core);
            let union = items.len() + core.len() - inter;
            if union == 0 {
                0.0
            } else {
                inter as f64 / union as f64
            }
        })
        .collect()
}

fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Runs the full reduction: select the item core, score users against it,
/// keep the `round(core_count * ratio)` best-scoring users, restrict their
/// interactions to core items, drop users at or below the interaction
/// threshold, and re-map ids densely (ascending original id order).
pub fn reduce(ds: &InteractionDataset, cfg: &PreprocessConfig) -> Result<InteractionDataset> {
    cfg.validate()?;
    let core = select_core_items(ds, cfg.core_item_count)?;
    let target_users = math::round(cfg.core_item_count as f64 * cfg.user_item_ratio) as usize;
    let target_users = target_users.min(ds.n_users());

    let sims = score_users(ds, &core);
    let mut by_sim: Vec<usize> = (0..ds.n_users()).collect();
    by_sim.sort_unstable_by(|&a, &b| sims[b].total_cmp(&sims[a]).then(a.cmp(&b)));
    let candidates = &by_sim[..target_users];

    // Restrict to core items and apply the strict threshold.
    let mut survivors: Vec<(usize, Vec<usize>)> = Vec::new();
    for &u in candidates {
        let retained: Vec<usize> = ds
            .items_of(u)
            .iter()
            .copied()
            .filter(|i| core.binary_search(i).is_ok())
            .collect();
        if retained.len() > cfg.min_user_interactions {
            survivors.push((u, retained));
        }
    }
    if survivors.is_empty() {
        return Err(Error::EmptyReduction);
    }
    survivors.sort_unstable_by_key(|&(u, _)| u);

    // Items actually touched by a surviving user, ascending original id.
    let mut kept_items: Vec<usize> = survivors
        .iter()
        .flat_map(|(_, items)| items.iter().copied())
        .collect();
    kept_items.sort_unstable();
    kept_items.dedup();

    let mut item_remap = alloc::collections::BTreeMap::new();
    for (new_id, &old_id) in kept_items.iter().enumerate() {
        item_remap.insert(old_id, new_id);
    }

    let user_keys: Vec<_> = survivors
        .iter()
        .map(|&(u, _)| ds.user_key(u).to_string())
        .collect();
    let item_keys: Vec<_> = kept_items
        .iter()
        .map(|&i| ds.item_key(i).to_string())
        .collect();
    let items_by_user: Vec<Vec<usize>> = survivors
        .iter()
        .map(|(_, items)| items.iter().map(|i| item_remap[i]).collect())
        .collect();

    Ok(InteractionDataset::from_parts(
        user_keys,
        item_keys,
        items_by_user,
    ))
}

/// Per-user split: each user's interactions are shuffled with a seeded
/// generator and `ceil(train_fraction * count)` of them go to train, the
/// rest to test. Both halves share the parent id maps, so users whose
/// interactions all land in train simply have an empty test row.
pub fn split(
    ds: &InteractionDataset,
    train_fraction: f64,
    seed: u64,
) -> (InteractionDataset, InteractionDataset) {
    assert!(
        train_fraction > 0.0 && train_fraction < 1.0,
        "train_fraction must lie strictly between 0 and 1"
    );
    let mut rng = Rng::with_stream(seed, SPLIT_STREAM);
    let mut train_items: Vec<Vec<usize>> = Vec::with_capacity(ds.n_users());
    let mut test_items: Vec<Vec<usize>> = Vec::with_capacity(ds.n_users());
    for u in 0..ds.n_users() {
        let mut items = ds.items_of(u).to_vec();
        rng.shuffle(&mut items);
        let cut = (math::ceil(train_fraction * items.len() as f64) as usize).min(items.len());
        let mut train_part = items[..cut].to_vec();
        let mut test_part = items[cut..].to_vec();
        train_part.sort_unstable();
        test_part.sort_unstable();
        train_items.push(train_part);
        test_items.push(test_part);
    }
    let user_keys: Vec<_> = (0..ds.n_users()).map(|u| ds.user_key(u).to_string()).collect();
    let item_keys: Vec<_> = (0..ds.n_items()).map(|i| ds.item_key(i).to_string()).collect();
    (
        InteractionDataset::from_parts(user_keys.clone(), item_keys.clone(), train_items),
        InteractionDataset::from_parts(user_keys, item_keys, test_items),
    )
}
