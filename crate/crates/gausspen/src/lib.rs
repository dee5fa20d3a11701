//! File formats, experiment configuration and the `gausspen` command-line
//! runner built on [`gausspen_core`].
//!
//! * [`idx`]: IDX tensor parsing and serialization (gzip with the `gzip` feature).
//! * [`tabular`]: CSV data sets with a trailing `label` column.
//! * [`checkpoint`]: binary MLP weight files.
//! * [`config`]: sectioned `key = value` experiment files.
//! * [`experiments`]: the runners behind each command.
//! * [`report`]: CSV tables with round-trip float formatting.

pub mod checkpoint;
pub mod config;
pub mod experiments;
pub mod idx;
pub mod report;
pub mod tabular;

pub use gausspen_core as core;

use std::path::PathBuf;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "GAUSSPEN_OUT";
pub const DEFAULT_OUT: &str = "gausspen-out";

/// `--out`, then the config file, then `$GAUSSPEN_OUT`, then `gausspen-out`.
pub fn resolve_out_dir(flag: Option<PathBuf>, config: Option<PathBuf>) -> PathBuf {
    flag.or(config)
        .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}
