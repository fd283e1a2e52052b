//! Id-mapped implicit-feedback interaction data.
//!
//! Raw logs carry opaque string keys; `ingest` assigns dense integer ids in
//! first-appearance order and collapses duplicate interactions. All
//! downstream modules work purely on the dense ids.

use crate::error::{Error, Result};
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

/// Raw (user_key, item_key) pairs as read from an interaction log.
/// Duplicates are allowed; they collapse during ingestion.
#[derive(Clone, Debug, Default)]
pub struct RawInteractionLog {
    pub records: Vec<(String, String)>,
}

impl RawInteractionLog {
    pub fn new(records: Vec<(String, String)>) -> Self {
        Self { records }
    }
}

/// A deduplicated interaction set over dense user/item ids, with
/// bidirectional maps back to the original keys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteractionDataset {
    user_keys: Vec<String>,
    item_keys: Vec<String>,
    user_ids: BTreeMap<String, usize>,
    item_ids: BTreeMap<String, usize>,
    /// Sorted, deduplicated item ids per user. May contain empty rows for
    /// datasets produced by `split`, which shares the parent id maps.
    items_by_user: Vec<Vec<usize>>,
}

impl InteractionDataset {
    pub(crate) fn from_parts(
        user_keys: Vec<String>,
        item_keys: Vec<String>,
        items_by_user: Vec<Vec<usize>>,
    ) -> Self {
        let user_ids = user_keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
        let item_ids = item_keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
        Self {
            user_keys,
            item_keys,
            user_ids,
            item_ids,
            items_by_user,
        }
    }

    pub fn n_users(&self) -> usize {
        self.user_keys.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_keys.len()
    }

    pub fn n_interactions(&self) -> usize {
        self.items_by_user.iter().map(Vec::len).sum()
    }

    /// Sorted item ids the user has interacted with.
    pub fn items_of(&self, user: usize) -> &[usize] {
        &self.items_by_user[user]
    }

    pub fn contains(&self, user: usize, item: usize) -> bool {
        self.items_by_user[user].binary_search(&item).is_ok()
    }

    pub fn user_key(&self, user: usize) -> &str {
        &self.user_keys[user]
    }

    pub fn item_key(&self, item: usize) -> &str {
        &self.item_keys[item]
    }

    pub fn user_id(&self, key: &str) -> Option<usize> {
        self.user_ids.get(key).copied()
    }

    pub fn item_id(&self, key: &str) -> Option<usize> {
        self.item_ids.get(key).copied()
    }

    /// Interaction pairs in ascending (user, item) order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.items_by_user
            .iter()
            .enumerate()
            .flat_map(|(u, items)| items.iter().map(move |&i| (u, i)))
    }

    /// Interactions per retained item.
    pub fn item_degrees(&self) -> Vec<usize> {
        let mut degrees = alloc::vec![0usize; self.n_items()];
        for (_, i) in self.pairs() {
            degrees[i] += 1;
        }
        degrees
    }

    /// Re-expresses foreign (user_key, item_key) records over this dataset's
    /// id maps, dropping records whose keys are unknown here. Returns the
    /// aligned dataset (sharing these id maps) and the dropped-record count.
    pub fn align(&self, log: &RawInteractionLog) -> (InteractionDataset, usize) {
        let mut items_by_user: Vec<Vec<usize>> = alloc::vec![Vec::new(); self.n_users()];
        let mut dropped = 0usize;
        for (user_key, item_key) in &log.records {
            match (self.user_id(user_key), self.item_id(item_key)) {
                (Some(u), Some(i)) => items_by_user[u].push(i),
                _ => dropped += 1,
            }
        }
        for items in items_by_user.iter_mut() {
            items.sort_unstable();
            items.dedup();
        }
        (
            InteractionDataset::from_parts(
                self.user_keys.clone(),
                self.item_keys.clone(),
                items_by_user,
            ),
            dropped,
        )
    }
}

/// Assigns dense ids in first-appearance order and collapses duplicates.
pub fn ingest(log: &RawInteractionLog) -> Result<InteractionDataset> {
    if log.records.is_empty() {
        return Err(Error::EmptyLog);
    }
    let mut user_ids: BTreeMap<String, usize> = BTreeMap::new();
    let mut item_ids: BTreeMap<String, usize> = BTreeMap::new();
    let mut user_keys: Vec<String> = Vec::new();
    let mut item_keys: Vec<String> = Vec::new();
    let mut items_by_user: Vec<Vec<usize>> = Vec::new();
    for (user_key, item_key) in &log.records {
        let u = *user_ids.entry(user_key.clone()).or_insert_with(|| {
            user_keys.push(user_key.clone());
            items_by_user.push(Vec::new());
            user_keys.len() - 1
        });
        let i = *item_ids.entry(item_key.clone()).or_insert_with(|| {
            item_keys.push(item_key.clone());
            item_keys.len() - 1
        });
        items_by_user[u].push(i);
    }
    for items in items_by_user.iter_mut() {
        items.sort_unstable();
        items.dedup();
    }
    Ok(InteractionDataset::from_parts(
        user_keys, item_keys, items_by_user,
    ))
}
