//! The four pipeline commands. Every command is deterministic given its
//! inputs, flags and seed: artifacts carry no timestamps, iteration orders
//! are fixed, and all randomness flows from the seed.

use crate::checkpoint::{read_checkpoint, write_checkpoint};
use crate::error::{CliError, CliResult};
use crate::formats::{metrics_json, write_history, write_stats, PreprocessEcho, PreprocessStats};
use crate::opts::{EvaluateArgs, GraphArgs, PreprocessArgs, RecommendArgs, TrainArgs};
use crate::parallel::{evaluate_parallel, resolve_threads};
use crate::tsv::{read_interactions, write_interactions};
use combigcn_core::{
    build_variant, build_weighted_user_matrix, ingest, predict_score, propagate, recommend_topk,
    train_with_progress, Error, InteractionDataset, ModelVariant, PreprocessConfig, TrainConfig,
    WeightConfig,
};
use std::fs;
use std::path::{Path, PathBuf};

/// Configuration mistakes are the caller's problem (exit 2); anything that
/// happens mid-pipeline is a runtime failure (exit 1).
fn config_error(err: Error) -> CliError {
    match err {
        Error::InvalidConfig(_) | Error::CoreItemCountOutOfRange { .. } => {
            CliError::Input(err.to_string())
        }
        other => CliError::Runtime(other.to_string()),
    }
}

fn sibling(path: &Path, extension: &str) -> PathBuf {
    path.with_extension(extension)
}

pub fn cmd_preprocess(args: &PreprocessArgs) -> CliResult<()> {
    let log = read_interactions(&args.input)?;
    let ds = ingest(&log).map_err(|e| CliError::Input(e.to_string()))?;
    let cfg = PreprocessConfig {
        core_item_count: args.core_items.unwrap_or_else(|| ds.n_items()),
        user_item_ratio: args.ratio,
        min_user_interactions: args.min_interactions,
    };
    let reduced = combigcn_core::reduce(&ds, &cfg).map_err(config_error)?;
    write_interactions(&args.out, &reduced)?;

    let interactions = reduced.n_interactions();
    let density = interactions as f64 / (reduced.n_users() * reduced.n_items()) as f64;
    let stats = PreprocessStats {
        n: reduced.n_users(),
        m: reduced.n_items(),
        interactions,
        density,
        config: PreprocessEcho {
            core_items: cfg.core_item_count,
            ratio: cfg.user_item_ratio,
            min_interactions: cfg.min_user_interactions,
            seed: args.seed,
            split_fraction: args.split_fraction,
        },
    };
    let stats_path = sibling(&args.out, "stats.json");
    write_stats(&stats_path, &stats)?;
    println!(
        "reduced n={} m={} interactions={interactions}",
        reduced.n_users(),
        reduced.n_items()
    );

    if let Some(fraction) = args.split_fraction {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(CliError::Input(format!(
                "--split-fraction must lie strictly between 0 and 1, got {fraction}"
            )));
        }
        let (train, test) = combigcn_core::split(&reduced, fraction, args.seed);
        let train_path = sibling(&args.out, "train.tsv");
        let test_path = sibling(&args.out, "test.tsv");
        write_interactions(&train_path, &train)?;
        write_interactions(&test_path, &test)?;
        println!(
            "split train={} test={}",
            train.n_interactions(),
            test.n_interactions()
        );
    }
    Ok(())
}

fn load_train_test(
    train_path: &Path,
    test_path: &Path,
) -> CliResult<(InteractionDataset, InteractionDataset)> {
    let train_log = read_interactions(train_path)?;
    let train_ds = ingest(&train_log).map_err(|e| CliError::Input(e.to_string()))?;
    let test_log = read_interactions(test_path)?;
    let (test_ds, dropped) = train_ds.align(&test_log);
    if dropped > 0 {
        eprintln!("warning: dropped {dropped} test records with users or items unseen in training");
    }
    Ok((train_ds, test_ds))
}

fn weight_config(graph: &GraphArgs) -> WeightConfig {
    WeightConfig {
        quantization_bins: graph.bins,
        drop_self_loops: !graph.self_loops,
    }
}

fn train_config(args: &TrainArgs) -> TrainConfig {
    TrainConfig {
        learning_rate: args.lr,
        l2_lambda: args.l2,
        layers: args.graph.layers,
        dim: args.dim,
        batch_size: args.batch,
        eval_k: args.k,
        patience_epochs: args.patience,
        max_epochs: args.max_epochs,
        seed: args.seed,
    }
}

fn train_echo(args: &TrainArgs, effective: &TrainConfig) -> String {
    format!(
        "config variant={} lr={} l2={} layers={} dim={} batch={} k={} patience={} max_epochs={} seed={} bins={} self_loops={}",
        args.graph.variant.name(),
        effective.learning_rate,
        effective.l2_lambda,
        effective.layers,
        effective.dim,
        effective.batch_size,
        effective.eval_k,
        effective.patience_epochs,
        effective.max_epochs,
        effective.seed,
        args.graph.bins,
        args.graph.self_loops,
    )
}

pub fn cmd_train(args: &TrainArgs) -> CliResult<()> {
    let (train_ds, test_ds) = load_train_test(&args.train, &args.test)?;
    let cfg = train_config(args);
    cfg.validate().map_err(config_error)?;
    let w_cfg = weight_config(&args.graph);
    let (graphs, cfg) =
        build_variant(args.graph.variant, &train_ds, &cfg, &w_cfg).map_err(config_error)?;
    let echo = train_echo(args, &cfg);
    println!("{echo}");

    if let Some(dump_path) = &args.dump_weights {
        dump_weight_matrix(dump_path, args.graph.variant, &train_ds, &w_cfg)?;
    }

    let eval_k = cfg.eval_k;
    let (phi, history) = train_with_progress(&train_ds, &test_ds, &graphs, &cfg, |record, best| {
        println!(
            "epoch={} loss={} recall@{eval_k}={} precision@{eval_k}={} ndcg@{eval_k}={} best={}",
            record.epoch, record.loss, record.recall, record.precision, record.ndcg, best
        );
    })?;

    write_checkpoint(&args.out, &phi)?;
    let history_path = sibling(&args.out, "history.csv");
    write_history(&history_path, &history, &echo, eval_k)?;
    println!(
        "done best_epoch={} checkpoint={} history={}",
        history.best_epoch,
        args.out.display(),
        history_path.display()
    );
    Ok(())
}

fn dump_weight_matrix(
    path: &Path,
    variant: ModelVariant,
    train_ds: &InteractionDataset,
    w_cfg: &WeightConfig,
) -> CliResult<()> {
    let mut out = String::new();
    if variant == ModelVariant::CombiGcn {
        let r = combigcn_core::build_interaction_matrix(train_ds);
        let w = build_weighted_user_matrix(&r, w_cfg)?;
        for (i, j, v) in w.iter() {
            out.push_str(&format!("{i}\t{j}\t{v}\n"));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

fn check_dims(phi: &combigcn_core::EmbeddingTable, ds: &InteractionDataset) -> CliResult<()> {
    if phi.n_users() != ds.n_users() || phi.n_items() != ds.n_items() {
        return Err(CliError::Runtime(format!(
            "checkpoint shape (n={}, m={}, d={}) does not match dataset (n={}, m={}, d={})",
            phi.n_users(),
            phi.n_items(),
            phi.dim(),
            ds.n_users(),
            ds.n_items(),
            phi.dim(),
        )));
    }
    Ok(())
}

fn require_positive_k(k: usize) -> CliResult<()> {
    if k == 0 {
        return Err(CliError::Input(String::from("--k must be at least 1")));
    }
    Ok(())
}

/// Rebuilds the variant graphs around an existing checkpoint and returns the
/// combined final embedding.
fn final_embedding(
    phi: &combigcn_core::EmbeddingTable,
    train_ds: &InteractionDataset,
    graph: &GraphArgs,
) -> CliResult<combigcn_core::DenseMatrix> {
    let probe_cfg = TrainConfig {
        layers: graph.layers,
        dim: phi.dim(),
        ..TrainConfig::default()
    };
    let (graphs, effective) =
        build_variant(graph.variant, train_ds, &probe_cfg, &weight_config(graph))
            .map_err(config_error)?;
    let trace = propagate(phi, &graphs, effective.layers)?;
    Ok(trace.final_embed)
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> CliResult<()> {
    require_positive_k(args.k)?;
    let threads = resolve_threads()?;
    let phi = read_checkpoint(&args.checkpoint)?;
    let (train_ds, test_ds) = load_train_test(&args.train, &args.test)?;
    check_dims(&phi, &train_ds)?;
    let e_star = final_embedding(&phi, &train_ds, &args.graph)?;
    let report = evaluate_parallel(&e_star, &train_ds, &test_ds, args.k, threads)?;
    println!("{}", metrics_json(&report));
    Ok(())
}

pub fn cmd_recommend(args: &RecommendArgs) -> CliResult<()> {
    require_positive_k(args.k)?;
    let phi = read_checkpoint(&args.checkpoint)?;
    let train_log = read_interactions(&args.train)?;
    let train_ds = ingest(&train_log).map_err(|e| CliError::Input(e.to_string()))?;
    check_dims(&phi, &train_ds)?;
    let user = train_ds
        .user_id(&args.user)
        .ok_or_else(|| CliError::Input(format!("unknown user key {:?}", args.user)))?;
    let e_star = final_embedding(&phi, &train_ds, &args.graph)?;
    let ranked = recommend_topk(&e_star, user, args.k, train_ds.items_of(user), train_ds.n_users())?;
    for (rank, item) in ranked.iter().enumerate() {
        let score = predict_score(&e_star, user, *item, train_ds.n_users())?;
        println!("{}\t{}\t{}", rank + 1, train_ds.item_key(*item), score);
    }
    Ok(())
}
