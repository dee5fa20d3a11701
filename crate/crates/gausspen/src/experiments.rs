//! Experiment runners behind the CLI commands.
//!
//! Every runner builds its tables in memory, cell by cell, in a fixed grid
//! order. Cells may run on a worker pool but results are collected in grid
//! order, so output bytes do not depend on scheduling.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use gausspen_core::asymptotics::{
    bias_sample, estimation_error, summarize_bias, summarize_consistency, BiasReport, ConsistencyRow, LambdaRule,
    SimSpec,
};
use gausspen_core::datasets::{make_blobs, make_digit_bytes, dataset_from_bytes, split, with_label_noise, LabeledDataset};
use gausspen_core::neural::{train, MlpArchitecture, TrainConfig, TrainRun};
use gausspen_core::ols::{lambda_phase_scan, orthonormal_objective};
use gausspen_core::stats::lower_median;
use gausspen_core::{penalty_bounds, KinkRule, PenaltySpec};

use crate::checkpoint;
use crate::config::{
    BiasConfig, ConsistencyConfig, DatasetSource, ExperimentConfig, OrthoScanConfig, PenaltyTableConfig,
    SimulationConfig, Task, TrainConfigFile,
};
use crate::idx;
use crate::report::{format_float, Table};
use crate::row;
use crate::tabular;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cell {cell}: {message}")]
    Cell { cell: String, message: String },
    #[error("loading data: {0}")]
    Data(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("worker pool: {0}")]
    Pool(String),
}

fn cell_error(cell: impl Into<String>) -> impl FnOnce(String) -> RunError {
    let cell = cell.into();
    move |message| RunError::Cell { cell, message }
}

/// A file an experiment produces, relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Csv { name: String, table: Table },
    Binary { name: String, bytes: Vec<u8> },
}

impl Artifact {
    pub fn name(&self) -> &str {
        match self {
            Artifact::Csv { name, .. } | Artifact::Binary { name, .. } => name,
        }
    }

    fn csv(name: &str, table: Table) -> Self {
        Artifact::Csv { name: name.to_string(), table }
    }
}

/// Runs `f` on a pool of `jobs` threads, or on the global pool when `None`.
pub fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| RunError::Pool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

pub fn run(config: &ExperimentConfig) -> Result<Vec<Artifact>, RunError> {
    let seeds = &config.run.seeds;
    with_pool(config.run.jobs, || match &config.task {
        Task::PenaltyTable(c) => penalty_table(c),
        Task::OrthoScan(c) => ortho_scan(c),
        Task::Bias(c) => bias_mc(c, seeds),
        Task::Consistency(c) => consistency_mc(c, seeds),
        Task::Train(c) => train_mlp(c, seeds),
    })?
}

/// Writes artifacts under `out`, replacing existing files.
pub fn write_artifacts(out: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, RunError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io { path, source }
    };
    let mut written = Vec::with_capacity(artifacts.len());
    for artifact in artifacts {
        let path = out.join(artifact.name());
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io(parent))?;
        }
        match artifact {
            Artifact::Csv { table, .. } => table.write(&path).map_err(io(&path))?,
            Artifact::Binary { bytes, .. } => fs::write(&path, bytes).map_err(io(&path))?,
        }
        written.push(path);
    }
    Ok(written)
}

fn penalty_table(c: &PenaltyTableConfig) -> Result<Vec<Artifact>, RunError> {
    let mut curves = Table::new(&["penalty", "beta", "value", "gradient"]);
    let mut bounds = Table::new(&["penalty", "lipschitz", "sup_value", "convexity_radius"]);
    for spec in &c.penalties {
        let label = spec.to_string();
        let penalty = spec.validate().map_err(|e| cell_error(&label)(e.to_string()))?;
        for &b in &c.beta {
            let grad = penalty.grad(b, KinkRule::ZeroAtKink).map_err(|e| cell_error(format!("{label} beta={b}"))(e.to_string()))?;
            curves.push(row![label.as_str(), b, penalty.value(b), grad]);
        }
        let pb = penalty_bounds(spec).map_err(|e| cell_error(&label)(e.to_string()))?;
        bounds.push(row![label.as_str(), pb.lipschitz, pb.sup_value, pb.convexity_radius]);
    }
    Ok(vec![Artifact::csv("penalty_table.csv", curves), Artifact::csv("penalty_bounds.csv", bounds)])
}

fn ortho_scan(c: &OrthoScanConfig) -> Result<Vec<Artifact>, RunError> {
    let scan = lambda_phase_scan(c.beta_ols, c.kappa, &c.lambda).map_err(|e| cell_error("ortho-scan")(e.to_string()))?;
    let mut profiles = Table::new(&[
        "lambda",
        "minima",
        "global_location",
        "global_value",
        "global_second_derivative",
        "other_location",
        "other_value",
        "other_second_derivative",
    ]);
    let mut minima = Table::new(&["lambda", "index", "location", "value", "second_derivative", "is_global"]);
    for p in &scan.profiles {
        let g = p.global();
        let other = p.minima.iter().enumerate().find(|(i, _)| *i != p.global_index).map(|(_, m)| m);
        profiles.push(row![
            p.lambda,
            p.minima.len(),
            g.location,
            g.value,
            g.second_derivative,
            other.map(|m| m.location),
            other.map(|m| m.value),
            other.map(|m| m.second_derivative),
        ]);
        for (i, m) in p.minima.iter().enumerate() {
            minima.push(row![p.lambda, i, m.location, m.value, m.second_derivative, i == p.global_index]);
        }
    }
    let mut curves = Table::new(&["lambda", "beta", "objective"]);
    for &lambda in &c.lambda {
        for &b in &c.curve_beta {
            curves.push(row![lambda, b, orthonormal_objective(c.beta_ols, b, lambda, c.kappa)]);
        }
    }
    let mut transition = Table::new(&["beta_ols", "kappa", "crossing_found", "lambda_star"]);
    transition.push(row![c.beta_ols, c.kappa, scan.transition.is_some(), scan.transition]);
    Ok(vec![
        Artifact::csv("ortho_profiles.csv", profiles),
        Artifact::csv("ortho_minima.csv", minima),
        Artifact::csv("ortho_curves.csv", curves),
        Artifact::csv("ortho_transition.csv", transition),
    ])
}

fn sim_spec(sim: &SimulationConfig, n: usize, rule: LambdaRule, seed: u64) -> SimSpec {
    SimSpec {
        beta_true: sim.beta.clone(),
        c: sim.covariance.clone(),
        sigma: sim.sigma,
        n,
        lambda_rule: rule,
        lambda0: sim.lambda0,
        kappa: sim.kappa,
        replicates: sim.replicates,
        seed,
    }
}

/// Bias report for one seed with replicates spread over the pool.
pub fn bias_report(spec: &SimSpec) -> Result<BiasReport, String> {
    let outcomes: Vec<_> = (0..spec.replicates as u64).into_par_iter().map(|r| bias_sample(spec, r)).collect();
    summarize_bias(spec, outcomes).map_err(|e| e.to_string())
}

pub fn consistency_row(spec: &SimSpec) -> Result<ConsistencyRow, String> {
    let outcomes: Vec<_> = (0..spec.replicates as u64).into_par_iter().map(|r| estimation_error(spec, r)).collect();
    summarize_consistency(spec, outcomes).map_err(|e| e.to_string())
}

fn median(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    lower_median(&v).unwrap_or(f64::NAN)
}

fn bias_mc(c: &BiasConfig, seeds: &[u64]) -> Result<Vec<Artifact>, RunError> {
    let reports: Vec<(u64, BiasReport)> = seeds
        .iter()
        .map(|&seed| {
            let spec = sim_spec(&c.sim, c.n, LambdaRule::SqrtN, seed);
            bias_report(&spec).map(|r| (seed, r)).map_err(cell_error(format!("seed={seed}")))
        })
        .collect::<Result<_, _>>()?;
    let lambda_n = sim_spec(&c.sim, c.n, LambdaRule::SqrtN, 0).lambda_n();
    let mut table = Table::new(&[
        "seed",
        "coordinate",
        "beta",
        "n",
        "lambda_n",
        "empirical_mean",
        "empirical_se",
        "theoretical_bias",
        "z_score",
        "replicates_used",
        "failed",
    ]);
    for (seed, r) in &reports {
        for j in 0..c.sim.beta.len() {
            table.push(row![
                *seed,
                j,
                c.sim.beta[j],
                c.n,
                lambda_n,
                r.empirical_mean[j],
                r.empirical_se[j],
                r.theoretical_bias[j],
                r.z_scores[j],
                r.replicates_used,
                r.failed,
            ]);
        }
    }
    for j in 0..c.sim.beta.len() {
        table.push(row![
            "median",
            j,
            c.sim.beta[j],
            c.n,
            lambda_n,
            median(reports.iter().map(|(_, r)| r.empirical_mean[j])),
            median(reports.iter().map(|(_, r)| r.empirical_se[j])),
            reports[0].1.theoretical_bias[j],
            median(reports.iter().map(|(_, r)| r.z_scores[j])),
            reports.iter().map(|(_, r)| r.replicates_used).sum::<usize>(),
            reports.iter().map(|(_, r)| r.failed).sum::<usize>(),
        ]);
    }
    Ok(vec![Artifact::csv("bias_report.csv", table)])
}

fn consistency_mc(c: &ConsistencyConfig, seeds: &[u64]) -> Result<Vec<Artifact>, RunError> {
    let rule = LambdaRule::Power { exponent: c.lambda_exponent };
    let mut rows: Vec<(u64, ConsistencyRow)> = Vec::new();
    for &seed in seeds {
        for &n in &c.n {
            let spec = sim_spec(&c.sim, n, rule, seed);
            let row = consistency_row(&spec).map_err(cell_error(format!("seed={seed} n={n}")))?;
            rows.push((seed, row));
        }
    }
    let mut table = Table::new(&["seed", "n", "lambda_n", "median_error", "failed"]);
    for (seed, r) in &rows {
        table.push(row![*seed, r.n, r.lambda_n, r.median_error, r.failed]);
    }
    for &n in &c.n {
        let at_n: Vec<&ConsistencyRow> = rows.iter().filter(|(_, r)| r.n == n).map(|(_, r)| r).collect();
        table.push(row![
            "median",
            n,
            at_n[0].lambda_n,
            median(at_n.iter().map(|r| r.median_error)),
            at_n.iter().map(|r| r.failed).sum::<usize>(),
        ]);
    }
    Ok(vec![Artifact::csv("consistency.csv", table)])
}

/// Train, validation and test splits for a training config. Label noise
/// touches the training and validation splits only.
pub fn load_splits(c: &TrainConfigFile) -> Result<(LabeledDataset, LabeledDataset, LabeledDataset), RunError> {
    let data_err = |e: &dyn std::fmt::Display| RunError::Data(e.to_string());
    let (data, noise) = match &c.dataset {
        DatasetSource::Blobs { classes, per_class, dimension, separation, label_noise } => (
            make_blobs(*classes, *per_class, *dimension, *separation, c.data_seed).map_err(|e| data_err(&e))?,
            *label_noise,
        ),
        DatasetSource::Digits { per_class, noise, label_noise } => {
            let (pixels, labels) = make_digit_bytes(*per_class, *noise, c.data_seed).map_err(|e| data_err(&e))?;
            (dataset_from_bytes(&pixels, &labels, 10).map_err(|e| data_err(&e))?, *label_noise)
        }
        DatasetSource::Csv { path, num_classes } => {
            let data = tabular::read_dataset(path, *num_classes)
                .map_err(|e| RunError::Data(format!("{}: {e}", path.display())))?;
            (data, 0.0)
        }
        DatasetSource::Idx { images, labels, num_classes } => {
            let images = idx::read_idx_file(images).map_err(|e| data_err(&e))?;
            let labels = idx::read_idx_file(labels).map_err(|e| data_err(&e))?;
            (idx::dataset_from_idx(&images, &labels, *num_classes).map_err(|e| data_err(&e))?, 0.0)
        }
    };
    let (tr, va, te) = split(&data, c.split, c.data_seed).map_err(|e| data_err(&e))?;
    if noise > 0.0 {
        let tr = with_label_noise(&tr, noise, c.data_seed.wrapping_add(1)).map_err(|e| data_err(&e))?;
        let va = with_label_noise(&va, noise, c.data_seed.wrapping_add(2)).map_err(|e| data_err(&e))?;
        return Ok((tr, va, te));
    }
    Ok((tr, va, te))
}

/// One trained cell of the penalty × λ × seed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainCell {
    pub penalty_index: usize,
    pub penalty: PenaltySpec,
    pub lambda_index: usize,
    pub lambda: f64,
    pub seed: u64,
    pub run: TrainRun,
}

impl TrainCell {
    pub fn label(&self) -> String {
        cell_label(&self.penalty, self.lambda, self.seed)
    }

    pub fn checkpoint_name(&self) -> String {
        format!("checkpoints/p{}_l{}_s{}.gpck", self.penalty_index, self.lambda_index, self.seed)
    }
}

fn cell_label(penalty: &PenaltySpec, lambda: f64, seed: u64) -> String {
    format!("penalty={penalty} lambda={} seed={seed}", format_float(lambda))
}

/// Trains every cell; results come back in grid order.
pub fn train_grid(c: &TrainConfigFile, seeds: &[u64]) -> Result<Vec<TrainCell>, RunError> {
    let (tr, va, te) = load_splits(c)?;
    let mut sizes = vec![tr.dim()];
    sizes.extend(&c.hidden);
    sizes.push(tr.num_classes);
    let arch = MlpArchitecture::new(sizes).map_err(|e| RunError::Data(e.to_string()))?;
    let mut jobs = Vec::new();
    for (pi, spec) in c.penalties.iter().enumerate() {
        for (li, &lambda) in c.lambdas[pi].iter().enumerate() {
            for &seed in seeds {
                jobs.push((pi, *spec, li, lambda, seed));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(penalty_index, penalty, lambda_index, lambda, seed)| {
            let config = TrainConfig {
                penalty,
                lambda,
                lr_min: c.lr_min,
                lr_max: c.lr_max,
                cycle_length: c.cycle_length,
                batch_size: c.batch_size,
                patience: c.patience,
                max_epochs: c.max_epochs,
                seed,
            };
            train(&tr, &va, &te, &arch, &config)
                .map(|run| TrainCell { penalty_index, penalty, lambda_index, lambda, seed, run })
                .map_err(|e| RunError::Cell { cell: cell_label(&penalty, lambda, seed), message: e.to_string() })
        })
        .collect()
}

/// Median-over-seeds summary of one (penalty, λ) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub penalty_index: usize,
    pub penalty: PenaltySpec,
    pub lambda_index: usize,
    pub lambda: f64,
    pub median_test_error: f64,
    pub median_validation_loss: f64,
}

pub fn summarize_grid(cells: &[TrainCell]) -> Vec<TrainSummary> {
    let mut out: Vec<TrainSummary> = Vec::new();
    for cell in cells {
        if out.last().is_some_and(|s| s.penalty_index == cell.penalty_index && s.lambda_index == cell.lambda_index) {
            continue;
        }
        let group: Vec<&TrainCell> = cells
            .iter()
            .filter(|c| c.penalty_index == cell.penalty_index && c.lambda_index == cell.lambda_index)
            .collect();
        out.push(TrainSummary {
            penalty_index: cell.penalty_index,
            penalty: cell.penalty,
            lambda_index: cell.lambda_index,
            lambda: cell.lambda,
            median_test_error: median(group.iter().map(|c| c.run.test_error_rate)),
            median_validation_loss: median(group.iter().map(|c| c.run.best_validation_loss)),
        });
    }
    out
}

/// Per penalty, the λ with the lowest median validation loss (first on ties).
pub fn select_by_validation(summaries: &[TrainSummary]) -> Vec<TrainSummary> {
    let mut best: Vec<TrainSummary> = Vec::new();
    for s in summaries {
        match best.iter_mut().find(|b| b.penalty_index == s.penalty_index) {
            Some(b) if s.median_validation_loss < b.median_validation_loss => *b = s.clone(),
            Some(_) => {}
            None => best.push(s.clone()),
        }
    }
    best
}

fn train_mlp(c: &TrainConfigFile, seeds: &[u64]) -> Result<Vec<Artifact>, RunError> {
    let cells = train_grid(c, seeds)?;
    let mut runs = Table::new(&[
        "penalty",
        "lambda",
        "seed",
        "epochs",
        "best_epoch",
        "stop_reason",
        "best_validation_loss",
        "test_error",
        "checkpoint",
    ]);
    let mut epochs = Table::new(&["penalty", "lambda", "seed", "epoch", "train_loss", "validation_loss", "learning_rate"]);
    let mut artifacts = Vec::new();
    let summaries = summarize_grid(&cells);
    for summary in &summaries {
        let group = cells.iter().filter(|x| x.penalty_index == summary.penalty_index && x.lambda_index == summary.lambda_index);
        for cell in group {
            let label = cell.penalty.to_string();
            let checkpoint = if c.checkpoints {
                let name = cell.checkpoint_name();
                artifacts.push(Artifact::Binary { name: name.clone(), bytes: checkpoint::encode(&cell.run.best_weights) });
                name
            } else {
                String::new()
            };
            runs.push(row![
                label.as_str(),
                cell.lambda,
                cell.seed,
                cell.run.epoch_log.len(),
                cell.run.best_epoch,
                cell.run.stop_reason.name(),
                cell.run.best_validation_loss,
                cell.run.test_error_rate,
                checkpoint,
            ]);
            for e in &cell.run.epoch_log {
                epochs.push(row![label.as_str(), cell.lambda, cell.seed, e.epoch, e.train_loss, e.validation_loss, e.learning_rate]);
            }
        }
        runs.push(row![
            summary.penalty.to_string(),
            summary.lambda,
            "median",
            "",
            "",
            "",
            summary.median_validation_loss,
            summary.median_test_error,
            "",
        ]);
    }
    let mut best = Table::new(&["penalty", "lambda", "median_validation_loss", "median_test_error"]);
    for s in select_by_validation(&summaries) {
        best.push(row![s.penalty.to_string(), s.lambda, s.median_validation_loss, s.median_test_error]);
    }
    let mut out = vec![
        Artifact::csv("train_runs.csv", runs),
        Artifact::csv("train_epochs.csv", epochs),
        Artifact::csv("train_best.csv", best),
    ];
    out.extend(artifacts);
    Ok(out)
}
