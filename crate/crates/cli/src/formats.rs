//! Serialized artifacts: the preprocess stats sidecar, the training history
//! CSV and the metrics report JSON. Everything is written with
//! shortest-roundtrip float formatting and fixed field order, so identical
//! runs produce identical bytes.

use crate::error::CliResult;
use combigcn_core::{MetricsReport, TrainHistory};
use serde::Serialize;
use std::fs;
use std::path::Path;

#[derive(Serialize)]
pub struct PreprocessStats {
    pub n: usize,
    pub m: usize,
    pub interactions: usize,
    pub density: f64,
    pub config: PreprocessEcho,
}

#[derive(Serialize)]
pub struct PreprocessEcho {
    pub core_items: usize,
    pub ratio: f64,
    pub min_interactions: usize,
    pub seed: u64,
    pub split_fraction: Option<f64>,
}

pub fn write_stats(path: &Path, stats: &PreprocessStats) -> CliResult<()> {
    let mut json = serde_json::to_string_pretty(stats).expect("stats serialize");
    json.push('\n');
    fs::write(path, json)?;
    Ok(())
}

#[derive(Serialize)]
struct MetricsJson {
    k: usize,
    precision: f64,
    recall: f64,
    ndcg: f64,
    users: usize,
}

pub fn metrics_json(report: &MetricsReport) -> String {
    serde_json::to_string(&MetricsJson {
        k: report.k,
        precision: report.precision,
        recall: report.recall,
        ndcg: report.ndcg,
        users: report.n_evaluated_users,
    })
    .expect("metrics serialize")
}

/// History CSV: config echo and outcome as `#` comment lines, then one row
/// per epoch.
pub fn write_history(
    path: &Path,
    history: &TrainHistory,
    config_echo: &str,
    eval_k: usize,
) -> CliResult<()> {
    let mut out = String::new();
    out.push_str("# combigcn training history\n");
    out.push_str(&format!("# {config_echo}\n"));
    out.push_str(&format!(
        "# best_epoch={} stopped_early={}\n",
        history.best_epoch, history.stopped_early
    ));
    out.push_str(&format!(
        "epoch,loss,recall@{eval_k},precision@{eval_k},ndcg@{eval_k}\n"
    ));
    for r in &history.epochs {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.epoch, r.loss, r.recall, r.precision, r.ndcg
        ));
    }
    fs::write(path, out)?;
    Ok(())
}
