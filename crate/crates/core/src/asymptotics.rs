//! Monte Carlo checks of the Gaussian-penalized least-squares estimator.
//!
//! Data follow `y = Xβ + e` with rows of `X` drawn from `N(0, C)` and
//! `e ~ N(0, σ²I)`. With `λₙ = o(n)` the estimator is consistent; with
//! `λₙ/√n → λ₀` the scaled error `√n(β̂ₙ − β)` converges to
//! `argmin V(u) = C⁻¹(W − λ₀κ·(β ⊙ exp(−κβ²)))`, `W ~ N(0, σ²C)`, whose mean
//! [`theoretical_rootn_bias`] returns.
//!
//! The solver minimizes the loss divided by n, so every fit uses the
//! per-observation weight `λₙ/n`.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{Cholesky, LinalgError, Matrix};
use crate::math;
use crate::ols::{fit, FitError, FitOptions, LinearProblem, Start};
use crate::penalty::PenaltySpec;
use crate::stats;

/// Largest tolerated fraction of replicates whose fit fails.
pub const MAX_FAILURE_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation spec: {0}")]
    InvalidSpec(&'static str),
    #[error("covariance matrix is not positive definite: {0}")]
    Covariance(LinalgError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("{failed} of {replicates} replicates failed (limit is 5%)")]
    TooManyFailures { failed: usize, replicates: usize },
}

/// How the penalty weight grows with the sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaRule {
    /// `λₙ = λ₀·n^exponent`; consistent when `exponent < 1`.
    Power { exponent: f64 },
    /// `λₙ = λ₀·√n`.
    SqrtN,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    pub beta_true: Vec<f64>,
    /// Covariance of the design rows.
    pub c: Matrix,
    pub sigma: f64,
    pub n: usize,
    pub lambda_rule: LambdaRule,
    pub lambda0: f64,
    pub kappa: f64,
    pub replicates: usize,
    pub seed: u64,
}

impl SimSpec {
    /// Unit-covariance spec with `λₙ = λ₀√n`.
    pub fn isotropic(beta_true: Vec<f64>, sigma: f64, n: usize, lambda0: f64, kappa: f64) -> Self {
        let p = beta_true.len();
        Self {
            beta_true,
            c: Matrix::identity(p),
            sigma,
            n,
            lambda_rule: LambdaRule::SqrtN,
            lambda0,
            kappa,
            replicates: 100,
            seed: 1,
        }
    }

    pub fn p(&self) -> usize {
        self.beta_true.len()
    }

    /// `λₙ` on the scale of the unnormalized squared loss.
    pub fn lambda_n(&self) -> f64 {
        let n = self.n as f64;
        match self.lambda_rule {
            LambdaRule::Power { exponent } => self.lambda0 * math::powf(n, exponent),
            LambdaRule::SqrtN => self.lambda0 * math::sqrt(n),
        }
    }

    /// Penalty weight for the solver's `(1/n)`-normalized objective.
    pub fn lambda_fit(&self) -> f64 {
        self.lambda_n() / self.n as f64
    }

    fn validate(&self) -> Result<Cholesky, SimError> {
        let p = self.p();
        if p == 0 {
            return Err(SimError::InvalidSpec("beta_true must be non-empty"));
        }
        if self.c.shape() != (p, p) {
            return Err(SimError::InvalidSpec("C must be p x p"));
        }
        if !self.c.is_finite() || !self.c.is_symmetric(1e-12) {
            return Err(SimError::InvalidSpec("C must be finite and symmetric"));
        }
        if self.beta_true.iter().any(|b| !b.is_finite()) {
            return Err(SimError::InvalidSpec("beta_true must be finite"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(SimError::InvalidSpec("sigma must be finite and > 0"));
        }
        if self.n <= p {
            return Err(SimError::InvalidSpec("n must exceed the number of coefficients"));
        }
        if self.replicates == 0 {
            return Err(SimError::InvalidSpec("replicates must be >= 1"));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(SimError::InvalidSpec("kappa must be finite and > 0"));
        }
        if !(self.lambda0 >= 0.0 && self.lambda0.is_finite()) {
            return Err(SimError::InvalidSpec("lambda0 must be finite and >= 0"));
        }
        if let LambdaRule::Power { exponent } = self.lambda_rule {
            if !(exponent >= 0.0 && exponent.is_finite()) {
                return Err(SimError::InvalidSpec("lambda exponent must be finite and >= 0"));
            }
        }
        Cholesky::new(&self.c).map_err(SimError::Covariance)
    }
}

fn draw(spec: &SimSpec, chol: &Cholesky, replicate_index: u64) -> Result<LinearProblem, SimError> {
    let p = spec.p();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(replicate_index);
    let mut x = Matrix::zeros(spec.n, p);
    let mut y = Vec::with_capacity(spec.n);
    let mut z = alloc::vec![0.0; p];
    for i in 0..spec.n {
        for zj in z.iter_mut() {
            *zj = StandardNormal.sample(&mut rng);
        }
        let row = chol.mul_lower(&z);
        let noise: f64 = StandardNormal.sample(&mut rng);
        let mean: f64 = row.iter().zip(&spec.beta_true).map(|(a, b)| a * b).sum();
        y.push(mean + spec.sigma * noise);
        x.row_mut(i).copy_from_slice(&row);
    }
    Ok(LinearProblem::new(x, y, false)?.center())
}

/// One centered data set; identical for identical `(spec.seed, replicate_index)`.
pub fn simulate_linear_data(spec: &SimSpec, replicate_index: u64) -> Result<LinearProblem, SimError> {
    let chol = spec.validate()?;
    draw(spec, &chol, replicate_index)
}

/// Mean of the √n limit law: `−λ₀κ·C⁻¹(β ⊙ exp(−κβ²))`.
pub fn theoretical_rootn_bias(c: &Matrix, beta_true: &[f64], lambda0: f64, kappa: f64) -> Result<Vec<f64>, SimError> {
    if c.shape() != (beta_true.len(), beta_true.len()) {
        return Err(SimError::InvalidSpec("C must be p x p"));
    }
    let drift: Vec<f64> = beta_true
        .iter()
        .map(|&b| lambda0 * kappa * b * math::exp(-kappa * b * b))
        .collect();
    let solved = Cholesky::new(c)?.solve(&drift);
    Ok(solved.into_iter().map(|v| -v).collect())
}

/// Ridge counterpart `−λ₀·C⁻¹β`, for comparison plots.
pub fn ridge_rootn_bias(c: &Matrix, beta_true: &[f64], lambda0: f64) -> Result<Vec<f64>, SimError> {
    if c.shape() != (beta_true.len(), beta_true.len()) {
        return Err(SimError::InvalidSpec("C must be p x p"));
    }
    let drift: Vec<f64> = beta_true.iter().map(|&b| lambda0 * b).collect();
    Ok(Cholesky::new(c)?.solve(&drift).into_iter().map(|v| -v).collect())
}

fn fit_replicate(spec: &SimSpec, chol: &Cholesky, replicate_index: u64, start: Start) -> Result<Vec<f64>, SimError> {
    let problem = draw(spec, chol, replicate_index)?;
    let opts = FitOptions { start, ..FitOptions::default() };
    let result = fit(&problem, &PenaltySpec::gaussian(spec.kappa), spec.lambda_fit(), &opts)?;
    if !result.converged {
        return Err(SimError::Fit(FitError::Divergence { iteration: result.iterations }));
    }
    Ok(result.beta_hat)
}

/// Whether a replicate failure is counted rather than aborting the experiment.
fn is_replicate_failure(err: &SimError) -> bool {
    matches!(err, SimError::Fit(FitError::Divergence { .. }))
}

/// `√n(β̂ − β)` for one replicate, fitted from the unpenalized solution.
pub fn bias_sample(spec: &SimSpec, replicate_index: u64) -> Result<Vec<f64>, SimError> {
    let chol = spec.validate()?;
    rootn_error(spec, &chol, replicate_index)
}

fn rootn_error(spec: &SimSpec, chol: &Cholesky, replicate_index: u64) -> Result<Vec<f64>, SimError> {
    let beta_hat = fit_replicate(spec, chol, replicate_index, Start::Ols)?;
    let root_n = math::sqrt(spec.n as f64);
    Ok(beta_hat.iter().zip(&spec.beta_true).map(|(h, b)| root_n * (h - b)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    /// Mean of `√n(β̂ − β)` over successful replicates.
    pub empirical_mean: Vec<f64>,
    pub empirical_se: Vec<f64>,
    pub theoretical_bias: Vec<f64>,
    /// `|empirical − theoretical| / se`.
    pub z_scores: Vec<f64>,
    pub replicates_used: usize,
    pub failed: usize,
}

fn check_failures(failed: usize, replicates: usize) -> Result<(), SimError> {
    if failed as f64 > MAX_FAILURE_FRACTION * replicates as f64 {
        Err(SimError::TooManyFailures { failed, replicates })
    } else {
        Ok(())
    }
}

/// Aggregates per-replicate outcomes in replicate order. Used by both the
/// sequential runner and parallel drivers.
pub fn summarize_bias(
    spec: &SimSpec,
    outcomes: impl IntoIterator<Item = Result<Vec<f64>, SimError>>,
) -> Result<BiasReport, SimError> {
    let p = spec.p();
    let mut samples: Vec<Vec<f64>> = alloc::vec![Vec::new(); p];
    let mut failed = 0;
    for outcome in outcomes {
        match outcome {
            Ok(sample) => {
                for (column, v) in samples.iter_mut().zip(sample) {
                    column.push(v);
                }
            }
            Err(err) if is_replicate_failure(&err) => failed += 1,
            Err(err) => return Err(err),
        }
    }
    check_failures(failed, spec.replicates)?;
    let replicates_used = spec.replicates - failed;
    let root_r = math::sqrt(replicates_used as f64);
    let empirical_mean: Vec<f64> = samples.iter().map(|c| stats::mean(c)).collect();
    let empirical_se: Vec<f64> = samples.iter().map(|c| stats::sample_sd(c) / root_r).collect();
    let theoretical_bias = theoretical_rootn_bias(&spec.c, &spec.beta_true, spec.lambda0, spec.kappa)?;
    let z_scores = empirical_mean
        .iter()
        .zip(&theoretical_bias)
        .zip(&empirical_se)
        .map(|((m, t), se)| math::abs(m - t) / se)
        .collect();
    Ok(BiasReport { empirical_mean, empirical_se, theoretical_bias, z_scores, replicates_used, failed })
}

/// Fits every replicate with `λ = λ₀√n` and compares the average scaled
/// error with [`theoretical_rootn_bias`].
pub fn run_bias_experiment(spec: &SimSpec) -> Result<BiasReport, SimError> {
    if spec.lambda_rule != LambdaRule::SqrtN {
        return Err(SimError::InvalidSpec("the bias experiment needs lambda_rule = sqrt_n"));
    }
    let chol = spec.validate()?;
    summarize_bias(spec, (0..spec.replicates as u64).map(|r| rootn_error(spec, &chol, r)))
}

/// `‖β̂ₙ − β‖₂` for one replicate, fitted with the default two-start descent.
pub fn estimation_error(spec: &SimSpec, replicate_index: u64) -> Result<f64, SimError> {
    let chol = spec.validate()?;
    estimation_error_with(spec, &chol, replicate_index)
}

fn estimation_error_with(spec: &SimSpec, chol: &Cholesky, replicate_index: u64) -> Result<f64, SimError> {
    let beta_hat = fit_replicate(spec, chol, replicate_index, Start::Multi)?;
    let sq: f64 = beta_hat.iter().zip(&spec.beta_true).map(|(h, b)| (h - b) * (h - b)).sum();
    Ok(math::sqrt(sq))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyRow {
    pub n: usize,
    pub lambda_n: f64,
    pub median_error: f64,
    pub failed: usize,
}

/// Reduces per-replicate errors at one sample size to a table row.
pub fn summarize_consistency(
    spec: &SimSpec,
    outcomes: impl IntoIterator<Item = Result<f64, SimError>>,
) -> Result<ConsistencyRow, SimError> {
    let mut errors = Vec::with_capacity(spec.replicates);
    let mut failed = 0;
    for outcome in outcomes {
        match outcome {
            Ok(e) => errors.push(e),
            Err(err) if is_replicate_failure(&err) => failed += 1,
            Err(err) => return Err(err),
        }
    }
    check_failures(failed, spec.replicates)?;
    let median_error = stats::lower_median(&errors).unwrap_or(f64::NAN);
    Ok(ConsistencyRow { n: spec.n, lambda_n: spec.lambda_n(), median_error, failed })
}

/// `template` with its sample size replaced.
pub fn at_sample_size(template: &SimSpec, n: usize) -> SimSpec {
    SimSpec { n, ..template.clone() }
}

/// Median `‖β̂ₙ − β‖₂` per sample size. Rules with exponent ≥ 1 are accepted
/// so that the inconsistent regime can be illustrated.
pub fn run_consistency_experiment(template: &SimSpec, n_grid: &[usize]) -> Result<Vec<ConsistencyRow>, SimError> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SimError::InvalidSpec("n grid must be non-empty and strictly increasing"));
    }
    n_grid
        .iter()
        .map(|&n| {
            let spec = at_sample_size(template, n);
            let chol = spec.validate()?;
            summarize_consistency(&spec, (0..spec.replicates as u64).map(|r| estimation_error_with(&spec, &chol, r)))
        })
        .collect()
}
