//! Per-user evaluation fanned out over scoped threads. Each user's metrics
//! are computed independently into a fixed slot and the final averaging
//! walks the slots in user order, so the result is bit-identical to the
//! sequential path no matter the thread count.

use crate::error::{CliError, CliResult};
use combigcn_core::evaluator::{aggregate, metrics_for_user};
use combigcn_core::model::recommend_topk;
use combigcn_core::{DenseMatrix, Error, InteractionDataset, MetricsReport};

/// Reads the `COMBIGCN_THREADS` cap, defaulting to the machine parallelism.
pub fn resolve_threads() -> CliResult<usize> {
    match std::env::var("COMBIGCN_THREADS") {
        Ok(raw) => raw
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| {
                CliError::Input(format!(
                    "COMBIGCN_THREADS must be a positive integer, got {raw:?}"
                ))
            }),
        Err(std::env::VarError::NotPresent) => Ok(std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)),
        Err(e) => Err(CliError::Input(format!("COMBIGCN_THREADS: {e}"))),
    }
}

pub fn evaluate_parallel(
    e_star: &DenseMatrix,
    train: &InteractionDataset,
    test: &InteractionDataset,
    k: usize,
    threads: usize,
) -> CliResult<MetricsReport> {
    let users: Vec<usize> = (0..train.n_users())
        .filter(|&u| !test.items_of(u).is_empty())
        .collect();
    if users.is_empty() {
        return Err(Error::NoTestUsers.into());
    }
    let threads = threads.clamp(1, users.len());
    let chunk_len = users.len().div_ceil(threads);
    let mut slots: Vec<(f64, f64, f64)> = vec![(0.0, 0.0, 0.0); users.len()];

    std::thread::scope(|scope| -> Result<(), Error> {
        let mut handles = Vec::new();
        for (slot_chunk, user_chunk) in slots.chunks_mut(chunk_len).zip(users.chunks(chunk_len)) {
            handles.push(scope.spawn(move || -> Result<(), Error> {
                for (slot, &u) in slot_chunk.iter_mut().zip(user_chunk) {
                    let recommended =
                        recommend_topk(e_star, u, k, train.items_of(u), train.n_users())?;
                    *slot = metrics_for_user(&recommended, test.items_of(u), k)?;
                }
                Ok(())
            }));
        }
        for handle in handles {
            handle.join().expect("evaluation worker panicked")?;
        }
        Ok(())
    })?;

    Ok(aggregate(&slots, k)?)
}
