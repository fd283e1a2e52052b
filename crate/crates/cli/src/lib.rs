//! IO, file formats and the command-line front end for the CombiGCN
//! recommender. All numeric work lives in `combigcn-core`; this crate reads
//! and writes TSV interaction logs, binary checkpoints, history CSVs and
//! metrics JSON, and wires them into the `preprocess`, `train`, `evaluate`
//! and `recommend` subcommands.

pub mod checkpoint;
pub mod commands;
pub mod error;
pub mod formats;
pub mod opts;
pub mod parallel;
pub mod tsv;
