use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use gausspen::config::{parse_config, Command};
use gausspen::experiments::{run, write_artifacts};
use gausspen::resolve_out_dir;

const CONFIG_ERROR: u8 = 1;
const RUNTIME_ERROR: u8 = 2;

/// Gaussian-penalty experiments: penalty tables, orthonormal-design scans,
/// Monte Carlo bias and consistency checks, and MLP training sweeps.
#[derive(Debug, Parser)]
#[command(name = "gausspen", version)]
struct Cli {
    /// penalty-table, ortho-scan, bias-mc, consistency-mc or train-mlp
    command: Command,
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated seeds, overriding the configuration.
    #[arg(long, value_delimiter = ',')]
    seed_list: Option<Vec<u64>>,
    /// Output directory (default: config `out`, then $GAUSSPEN_OUT, then ./gausspen-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent cells.
    #[arg(long, value_parser = clap::value_parser!(usize))]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { CONFIG_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    let mut config = match parse_config(&text, cli.command) {
        Ok(c) => c,
        Err(errors) => {
            eprint!("error: {}: {errors}", cli.config.display());
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    if let Some(seeds) = cli.seed_list {
        if seeds.is_empty() {
            eprintln!("error: --seed-list is empty");
            return ExitCode::from(CONFIG_ERROR);
        }
        config.run.seeds = seeds;
    }
    if cli.jobs == Some(0) {
        eprintln!("error: --jobs must be >= 1");
        return ExitCode::from(CONFIG_ERROR);
    }
    config.run.jobs = cli.jobs.or(config.run.jobs);
    let out = resolve_out_dir(cli.out, config.run.out.clone());

    let written = run(&config).and_then(|artifacts| write_artifacts(&out, &artifacts));
    match written {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {} failed: {e}", cli.command);
            ExitCode::from(RUNTIME_ERROR)
        }
    }
}
