//! Penalized least squares.
//!
//! [`fit`] minimizes `(1/n)‖y − Xβ‖² + λ·Σⱼ P(βⱼ)` by gradient descent with
//! Armijo backtracking. For designs with `(1/n)XᵀX = I` the problem splits
//! into independent scalar problems
//! `f(β) = −2β̂ᴼβ + β² + λ(1 − exp(−κβ²))`, which [`solve_orthonormal`]
//! analyzes exhaustively and [`lambda_phase_scan`] tracks along a λ grid.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{dot, norm2, Cholesky, LinalgError, Matrix};
use crate::math;
use crate::penalty::{KinkRule, Penalty, PenaltyError, PenaltySpec};

/// Column means of a centered problem must vanish to this tolerance.
pub const CENTERING_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("design has {rows} rows but the response has {len} entries")]
    LengthMismatch { rows: usize, len: usize },
    #[error("problem needs n >= 1 and p >= 1, got n = {n}, p = {p}")]
    Empty { n: usize, p: usize },
    #[error("design or response contains a non-finite value")]
    NonFiniteData,
    #[error("problem is flagged centered but column {column} has mean {mean}")]
    NotCentered { column: usize, mean: f64 },
    #[error("lambda must be finite and >= 0, got {0}")]
    InvalidLambda(f64),
    #[error("kappa must be finite and > 0, got {0}")]
    InvalidKappa(f64),
    #[error("start point has {found} coordinates, expected {expected}")]
    StartLength { expected: usize, found: usize },
    #[error("objective became non-finite at iteration {iteration}")]
    Divergence { iteration: usize },
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Design matrix (rows are observations) and response.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProblem {
    x: Matrix,
    y: Vec<f64>,
    centered: bool,
}

impl LinearProblem {
    /// Validates shapes and finiteness. With `centered = true` every column of
    /// `x` and `y` must already have mean zero.
    pub fn new(x: Matrix, y: Vec<f64>, centered: bool) -> Result<Self, FitError> {
        let (n, p) = x.shape();
        if n == 0 || p == 0 {
            return Err(FitError::Empty { n, p });
        }
        if y.len() != n {
            return Err(FitError::LengthMismatch { rows: n, len: y.len() });
        }
        if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
            return Err(FitError::NonFiniteData);
        }
        let problem = Self { x, y, centered };
        if centered {
            let means = problem.column_means();
            for (column, &mean) in means.iter().enumerate() {
                if math::abs(mean) > CENTERING_TOLERANCE {
                    return Err(FitError::NotCentered { column, mean });
                }
            }
            let y_mean = crate::stats::mean(&problem.y);
            if math::abs(y_mean) > CENTERING_TOLERANCE {
                return Err(FitError::NotCentered { column: p, mean: y_mean });
            }
        }
        Ok(problem)
    }

    /// Subtracts column means from `x` and the mean from `y`.
    pub fn center(mut self) -> Self {
        let means = self.column_means();
        let n = self.x.rows();
        for i in 0..n {
            for (v, m) in self.x.row_mut(i).iter_mut().zip(&means) {
                *v -= m;
            }
        }
        let y_mean = crate::stats::mean(&self.y);
        self.y.iter_mut().for_each(|v| *v -= y_mean);
        self.centered = true;
        self
    }

    fn column_means(&self) -> Vec<f64> {
        let n = self.x.rows();
        let mut sums = vec![0.0; self.x.cols()];
        for i in 0..n {
            for (s, v) in sums.iter_mut().zip(self.x.row(i)) {
                *s += v;
            }
        }
        sums.iter().map(|s| s / n as f64).collect()
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Unpenalized least squares via the normal equations.
    pub fn ols(&self) -> Result<Vec<f64>, FitError> {
        let q = Quadratic::from_problem(self);
        Ok(Cholesky::new(&q.gram)?.solve(&q.xty))
    }
}

/// `βᵀGβ − 2cᵀβ + s`, the squared loss divided by n.
#[derive(Debug, Clone)]
struct Quadratic {
    gram: Matrix,
    xty: Vec<f64>,
    yty: f64,
}

impl Quadratic {
    fn from_problem(problem: &LinearProblem) -> Self {
        let inv_n = 1.0 / problem.n() as f64;
        let mut gram = problem.x.gram();
        gram.scale(inv_n);
        let xty = problem.x.t_matvec(&problem.y).into_iter().map(|v| v * inv_n).collect();
        let yty = dot(&problem.y, &problem.y) * inv_n;
        Self { gram, xty, yty }
    }

    /// `Gβ − c`, half the loss gradient.
    fn half_grad(&self, beta: &[f64]) -> Vec<f64> {
        let mut r = self.gram.matvec(beta);
        r.iter_mut().zip(&self.xty).for_each(|(r, c)| *r -= c);
        r
    }

    fn value(&self, beta: &[f64]) -> f64 {
        let gb = self.gram.matvec(beta);
        dot(beta, &gb) - 2.0 * dot(&self.xty, beta) + self.yty
    }
}

/// Where gradient descent starts.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Start {
    /// Run from the origin and from the unpenalized solution; keep the lower objective.
    #[default]
    Multi,
    Origin,
    Ols,
    Point(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// First trial step of the line search.
    pub step_init: f64,
    /// Step shrink factor in `(0, 1)`.
    pub backtrack: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Stop once `‖∇‖₂` is at most this.
    pub grad_tol: f64,
    pub max_iter: usize,
    pub start: Start,
    /// Gradient convention for penalties with a kink at 0.
    pub kink: KinkRule,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            step_init: 1.0,
            backtrack: 0.5,
            armijo: 1e-4,
            grad_tol: 1e-8,
            max_iter: 100_000,
            start: Start::Multi,
            kink: KinkRule::Strict,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub beta_hat: Vec<f64>,
    /// `(iteration, objective)` after the start and after each accepted step.
    /// Values after the first are accumulated from exact per-step decreases,
    /// so the sequence is nonincreasing.
    pub objective_trace: Vec<(usize, f64)>,
    /// Objective at `beta_hat`, evaluated directly.
    pub objective: f64,
    pub converged: bool,
    pub grad_norm_final: f64,
    pub iterations: usize,
}

struct Objective<'a> {
    quad: Quadratic,
    penalty: Penalty,
    lambda: f64,
    opts: &'a FitOptions,
}

impl Objective<'_> {
    fn value(&self, beta: &[f64]) -> f64 {
        self.quad.value(beta) + self.lambda * self.penalty.sum(beta)
    }

    /// Returns `(∇f, Gβ − c)`.
    fn gradient(&self, beta: &[f64]) -> Result<(Vec<f64>, Vec<f64>), FitError> {
        let half = self.quad.half_grad(beta);
        let mut g = Vec::with_capacity(beta.len());
        for (&b, &h) in beta.iter().zip(&half) {
            let pg = if self.lambda == 0.0 { 0.0 } else { self.penalty.grad(b, self.opts.kink)? };
            g.push(2.0 * h + self.lambda * pg);
        }
        Ok((g, half))
    }

    /// `f(beta + d) − f(beta)` without forming the two objective values.
    fn change(&self, beta: &[f64], half: &[f64], d: &[f64]) -> f64 {
        let gd = self.quad.gram.matvec(d);
        let quad = dot(d, &gd) + 2.0 * dot(d, half);
        let pen: f64 = if self.lambda == 0.0 {
            0.0
        } else {
            beta.iter()
                .zip(d)
                .map(|(&b, &di)| self.penalty.increment(b, b + di))
                .sum()
        };
        quad + self.lambda * pen
    }

    fn descend(&self, start: Vec<f64>) -> Result<FitResult, FitError> {
        let opts = self.opts;
        let mut beta = start;
        let mut f = self.value(&beta);
        if !f.is_finite() {
            return Err(FitError::Divergence { iteration: 0 });
        }
        let mut trace = vec![(0, f)];
        let (mut g, mut half) = self.gradient(&beta)?;
        let mut step = opts.step_init;
        let mut iterations = 0;
        let mut converged = false;
        let mut trial = vec![0.0; beta.len()];
        let mut d = vec![0.0; beta.len()];
        while iterations < opts.max_iter {
            let gnorm = norm2(&g);
            if gnorm <= opts.grad_tol {
                converged = true;
                break;
            }
            let mut t = step;
            let accepted = loop {
                for ((tr, di), (&b, &gi)) in trial.iter_mut().zip(d.iter_mut()).zip(beta.iter().zip(&g)) {
                    *tr = b - t * gi;
                    *di = *tr - b;
                }
                if d.iter().all(|&di| di == 0.0) {
                    break None;
                }
                let delta = self.change(&beta, &half, &d);
                if !delta.is_finite() {
                    return Err(FitError::Divergence { iteration: iterations + 1 });
                }
                if delta < 0.0 && delta <= opts.armijo * dot(&g, &d) {
                    break Some(delta);
                }
                t *= opts.backtrack;
            };
            let Some(delta) = accepted else {
                // The step underflowed before sufficient decrease: stalled.
                break;
            };
            core::mem::swap(&mut beta, &mut trial);
            f += delta;
            iterations += 1;
            trace.push((iterations, f));
            (g, half) = self.gradient(&beta)?;
            step = t / opts.backtrack;
        }
        let objective = self.value(&beta);
        if !objective.is_finite() {
            return Err(FitError::Divergence { iteration: iterations });
        }
        let grad_norm_final = norm2(&g);
        Ok(FitResult {
            beta_hat: beta,
            objective_trace: trace,
            objective,
            converged: converged || grad_norm_final <= opts.grad_tol,
            grad_norm_final,
            iterations,
        })
    }
}

/// Minimizes `(1/n)‖y − Xβ‖² + λ·Σⱼ P(βⱼ)`.
///
/// Hitting `max_iter` is reported through `converged = false`, not as an error.
pub fn fit(
    problem: &LinearProblem,
    spec: &PenaltySpec,
    lambda: f64,
    opts: &FitOptions,
) -> Result<FitResult, FitError> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(FitError::InvalidLambda(lambda));
    }
    let penalty = spec.validate()?;
    let objective = Objective { quad: Quadratic::from_problem(problem), penalty, lambda, opts };
    let p = problem.p();
    let ols = |q: &Quadratic| -> Result<Vec<f64>, FitError> { Ok(Cholesky::new(&q.gram)?.solve(&q.xty)) };
    match &opts.start {
        Start::Origin => objective.descend(vec![0.0; p]),
        Start::Ols => objective.descend(ols(&objective.quad)?),
        Start::Point(start) => {
            if start.len() != p {
                return Err(FitError::StartLength { expected: p, found: start.len() });
            }
            objective.descend(start.clone())
        }
        Start::Multi => {
            let from_origin = objective.descend(vec![0.0; p])?;
            // A rank-deficient design has no unique unpenalized solution.
            let Ok(ols_start) = ols(&objective.quad) else {
                return Ok(from_origin);
            };
            let from_ols = objective.descend(ols_start)?;
            if from_ols.objective < from_origin.objective {
                Ok(from_ols)
            } else {
                Ok(from_origin)
            }
        }
    }
}

/// Builds a problem with `(1/n)XᵀX = I` whose per-coordinate least-squares
/// solution `Xᵀy/n` equals `beta_ols`. Requires `n >= beta_ols.len()`.
pub fn orthonormal_problem(beta_ols: &[f64], n: usize, seed: u64) -> Result<LinearProblem, FitError> {
    let p = beta_ols.len();
    if p == 0 || n < p {
        return Err(FitError::Empty { n, p });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Gram-Schmidt on Gaussian columns, stored column-major while orthogonalizing.
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(p);
    while columns.len() < p {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        for _ in 0..2 {
            for q in &columns {
                let proj = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= proj * qi);
            }
        }
        let norm = norm2(&v);
        if norm > 1e-8 {
            v.iter_mut().for_each(|vi| *vi /= norm);
            columns.push(v);
        }
    }
    let scale = math::sqrt(n as f64);
    let x = Matrix::from_fn(n, p, |i, j| columns[j][i] * scale);
    let y = x.matvec(beta_ols);
    LinearProblem::new(x, y, false)
}

/// `−2·β̂ᴼ·β + β² + λ(1 − exp(−κβ²))`.
pub fn orthonormal_objective(beta_ols: f64, beta: f64, lambda: f64, kappa: f64) -> f64 {
    -2.0 * beta_ols * beta + beta * beta - lambda * math::expm1(-kappa * beta * beta)
}

fn ortho_derivative(beta_ols: f64, beta: f64, lambda: f64, kappa: f64) -> f64 {
    -2.0 * beta_ols + 2.0 * beta + 2.0 * lambda * kappa * beta * math::exp(-kappa * beta * beta)
}

fn ortho_second_derivative(beta: f64, lambda: f64, kappa: f64) -> f64 {
    let kb2 = kappa * beta * beta;
    2.0 + 2.0 * lambda * kappa * math::exp(-kb2) * (1.0 - 2.0 * kb2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalMinimum {
    pub location: f64,
    pub value: f64,
    pub second_derivative: f64,
}

/// Local minima of the scalar orthonormal objective at one λ.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimaProfile {
    pub lambda: f64,
    /// Sorted by location.
    pub minima: Vec<LocalMinimum>,
    /// Smallest value; ties go to the smaller `|location|`.
    pub global_index: usize,
}

impl MinimaProfile {
    pub fn global(&self) -> &LocalMinimum {
        &self.minima[self.global_index]
    }
}

/// Grid size used to bracket sign changes of `f′`.
pub const ORTHO_GRID_POINTS: usize = 20_001;
/// Target `|f′|` after polishing a bracketed root.
pub const ORTHO_STATIONARITY_TOL: f64 = 1e-10;

fn check_ortho_inputs(beta_ols: f64, lambda: f64, kappa: f64) -> Result<(), FitError> {
    if !beta_ols.is_finite() {
        return Err(FitError::NonFiniteData);
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(FitError::InvalidLambda(lambda));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(FitError::InvalidKappa(kappa));
    }
    Ok(())
}

/// Finds every local minimum of the orthonormal objective on
/// `[−|β̂ᴼ| − 1, |β̂ᴼ| + 1]`; outside that interval `f′` has a fixed sign.
pub fn solve_orthonormal(beta_ols: f64, lambda: f64, kappa: f64) -> Result<MinimaProfile, FitError> {
    check_ortho_inputs(beta_ols, lambda, kappa)?;
    let df = |b: f64| ortho_derivative(beta_ols, b, lambda, kappa);
    let half_width = math::abs(beta_ols) + 1.0;
    let (lo, hi) = (-half_width, half_width);
    let last = (ORTHO_GRID_POINTS - 1) as f64;
    let at = |i: usize| lo + (hi - lo) * (i as f64 / last);

    let mut minima = Vec::new();
    let mut left = at(0);
    let mut d_left = df(left);
    for i in 1..ORTHO_GRID_POINTS {
        let right = at(i);
        let d_right = df(right);
        if d_left < 0.0 && d_right >= 0.0 {
            let location = polish_root(&df, left, right);
            let second_derivative = ortho_second_derivative(location, lambda, kappa);
            if second_derivative > 0.0 {
                minima.push(LocalMinimum {
                    location,
                    value: orthonormal_objective(beta_ols, location, lambda, kappa),
                    second_derivative,
                });
            }
        }
        left = right;
        d_left = d_right;
    }
    let global_index = pick_global(&minima);
    Ok(MinimaProfile { lambda, minima, global_index })
}

fn pick_global(minima: &[LocalMinimum]) -> usize {
    let mut best = 0;
    for (i, m) in minima.iter().enumerate().skip(1) {
        let b = &minima[best];
        if m.value < b.value || (m.value == b.value && math::abs(m.location) < math::abs(b.location)) {
            best = i;
        }
    }
    best
}

/// Bisection on a bracket with `f′(lo) < 0 <= f′(hi)`, then one secant step
/// if it lowers `|f′|`.
fn polish_root(df: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if df(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (dl, dh) = (df(lo), df(hi));
    let mut best = if math::abs(dl) <= math::abs(dh) { lo } else { hi };
    if dh != dl {
        let secant = lo - dl * (hi - lo) / (dh - dl);
        if secant >= lo && secant <= hi && math::abs(df(secant)) < math::abs(df(best)) {
            best = secant;
        }
    }
    best
}

/// Profiles along a λ grid and the λ at which the global minimum jumps basins.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseScan {
    pub profiles: Vec<MinimaProfile>,
    /// `None` when the global minimum stays in one basin over the grid span.
    pub transition: Option<f64>,
}

/// `value(OLS-side minimum) − value(shrunk minimum)`; infinite when one basin is absent.
fn basin_gap(profile: &MinimaProfile, beta_ols: f64) -> f64 {
    let ols_side = |m: &LocalMinimum| math::abs(m.location - beta_ols) <= math::abs(m.location);
    let far = profile.minima.iter().filter(|m| ols_side(m)).min_by(|a, b| {
        math::abs(a.location - beta_ols).total_cmp(&math::abs(b.location - beta_ols))
    });
    let near = profile
        .minima
        .iter()
        .filter(|m| !ols_side(m))
        .min_by(|a, b| math::abs(a.location).total_cmp(&math::abs(b.location)));
    match (far, near) {
        (Some(f), Some(n)) => f.value - n.value,
        (Some(_), None) => f64::NEG_INFINITY,
        (None, _) => f64::INFINITY,
    }
}

pub fn lambda_phase_scan(beta_ols: f64, kappa: f64, lambda_grid: &[f64]) -> Result<PhaseScan, FitError> {
    if lambda_grid.is_empty() {
        return Err(FitError::Empty { n: 0, p: 1 });
    }
    for w in lambda_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(FitError::InvalidLambda(w[1]));
        }
    }
    let profiles = lambda_grid
        .iter()
        .map(|&lambda| solve_orthonormal(beta_ols, lambda, kappa))
        .collect::<Result<Vec<_>, _>>()?;
    let gaps: Vec<f64> = profiles.iter().map(|p| basin_gap(p, beta_ols)).collect();
    let mut transition = None;
    for k in 0..gaps.len().saturating_sub(1) {
        if (gaps[k] > 0.0) != (gaps[k + 1] > 0.0) {
            let (mut lo, mut hi) = (lambda_grid[k], lambda_grid[k + 1]);
            let lo_positive = gaps[k] > 0.0;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let gap = basin_gap(&solve_orthonormal(beta_ols, mid, kappa)?, beta_ols);
                if (gap > 0.0) == lo_positive {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-12 * hi {
                    break;
                }
            }
            transition = Some(0.5 * (lo + hi));
            break;
        }
    }
    Ok(PhaseScan { profiles, transition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penalty::PenaltySpec;

    #[test]
    fn objective_examples() {
        assert_eq!(orthonormal_objective(3.0, 0.0, 7.0, 2.0), 0.0);
        let v = orthonormal_objective(3.0, 3.0, 15.1, 10.0);
        assert!((v - (-9.0 + 15.1 * (1.0 - (-90.0f64).exp()))).abs() < 1e-12);
        assert!((v - 6.1).abs() < 1e-12);
        assert_eq!(orthonormal_objective(3.0, 3.0, 0.0, 4.0), -9.0);
    }

    #[test]
    fn single_minimum_for_small_lambda() {
        let profile = solve_orthonormal(3.0, 0.1, 10.0).unwrap();
        assert_eq!(profile.minima.len(), 1);
        assert!((profile.global().location - 3.0).abs() < 1e-6);
    }

    #[test]
    fn two_minima_for_large_lambda() {
        let profile = solve_orthonormal(3.0, 15.1, 10.0).unwrap();
        assert_eq!(profile.minima.len(), 2);
        let global = profile.global();
        assert!((global.location - 3.0 / (1.0 + 10.0 * 15.1)).abs() < 1e-3);
        let other = profile.minima.iter().find(|m| m.location > 1.0).unwrap();
        assert!((other.location - 3.0).abs() < 1e-6);
    }

    #[test]
    fn zero_ols_gives_minimum_at_origin() {
        for (lambda, kappa) in [(0.0, 1.0), (3.0, 10.0), (50.0, 0.1)] {
            let profile = solve_orthonormal(0.0, lambda, kappa).unwrap();
            assert_eq!(profile.minima.len(), 1);
            assert!(profile.global().location.abs() < 1e-12);
        }
    }

    #[test]
    fn stationarity_certificate() {
        for lambda in [0.1, 5.0, 8.9, 15.1] {
            let profile = solve_orthonormal(3.0, lambda, 10.0).unwrap();
            for m in &profile.minima {
                let d = -6.0 + 2.0 * m.location + 2.0 * lambda * 10.0 * m.location * (-10.0 * m.location * m.location).exp();
                assert!(d.abs() <= 1e-8, "lambda {lambda}: {d}");
                assert!(m.second_derivative > 0.0);
            }
        }
    }

    #[test]
    fn tie_breaks_toward_smaller_magnitude() {
        let minima = [
            LocalMinimum { location: -2.0, value: 1.0, second_derivative: 1.0 },
            LocalMinimum { location: 1.0, value: 1.0, second_derivative: 1.0 },
            LocalMinimum { location: 3.0, value: 2.0, second_derivative: 1.0 },
        ];
        assert_eq!(pick_global(&minima), 1);
    }

    #[test]
    fn no_crossing_below_one() {
        let grid: Vec<f64> = (0..10).map(|k| 0.05 + 0.1 * k as f64).collect();
        let scan = lambda_phase_scan(3.0, 10.0, &grid).unwrap();
        assert_eq!(scan.transition, None);
        assert!(scan.profiles.iter().all(|p| p.minima.len() == 1));
    }

    #[test]
    fn scan_rejects_bad_grids() {
        assert!(lambda_phase_scan(3.0, 10.0, &[]).is_err());
        assert!(lambda_phase_scan(3.0, 10.0, &[1.0, 1.0]).is_err());
        assert!(lambda_phase_scan(3.0, 10.0, &[-1.0, 1.0]).is_err());
        assert!(solve_orthonormal(3.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn problem_validation() {
        assert!(matches!(
            LinearProblem::new(Matrix::zeros(3, 2), vec![0.0; 2], false),
            Err(FitError::LengthMismatch { .. })
        ));
        assert!(matches!(LinearProblem::new(Matrix::zeros(0, 2), vec![], false), Err(FitError::Empty { .. })));
        let x = Matrix::from_fn(4, 1, |i, _| i as f64);
        assert!(matches!(
            LinearProblem::new(x.clone(), vec![0.0; 4], true),
            Err(FitError::NotCentered { column: 0, .. })
        ));
        let centered = LinearProblem::new(x, vec![1.0, 2.0, 3.0, 5.0], false).unwrap().center();
        assert!(centered.is_centered());
        assert!(LinearProblem::new(centered.x().clone(), centered.y().to_vec(), true).is_ok());
        let mut bad = Matrix::zeros(2, 1);
        bad[(0, 0)] = f64::NAN;
        assert_eq!(LinearProblem::new(bad, vec![0.0; 2], false).unwrap_err(), FitError::NonFiniteData);
    }

    #[test]
    fn unpenalized_fit_matches_normal_equations() {
        let x = Matrix::from_fn(30, 3, |i, j| libm::sin((i * 3 + j) as f64 * 0.77) + if i % 3 == j { 1.0 } else { 0.0 });
        let y: Vec<f64> = (0..30).map(|i| libm::cos(i as f64)).collect();
        let problem = LinearProblem::new(x, y, false).unwrap();
        let ols = problem.ols().unwrap();
        let result = fit(&problem, &PenaltySpec::gaussian(10.0), 0.0, &FitOptions::default()).unwrap();
        assert!(result.converged);
        for (a, b) in result.beta_hat.iter().zip(&ols) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn saturated_penalty_leaves_large_coefficients() {
        let problem = orthonormal_problem(&[3.0, -3.0, 3.0], 20, 7).unwrap();
        let opts = FitOptions { start: Start::Ols, ..FitOptions::default() };
        let result = fit(&problem, &PenaltySpec::gaussian(10.0), 0.1, &opts).unwrap();
        for (b, e) in result.beta_hat.iter().zip([3.0, -3.0, 3.0]) {
            assert!((b - e).abs() < 1e-4);
        }
    }

    #[test]
    fn trace_is_nonincreasing_and_converged_means_small_gradient() {
        let problem = orthonormal_problem(&[0.4, -1.3, 2.0, 0.05], 12, 3).unwrap();
        let result = fit(&problem, &PenaltySpec::gaussian(4.0), 2.0, &FitOptions::default()).unwrap();
        assert!(result.converged);
        assert!(result.grad_norm_final <= 1e-8);
        for w in result.objective_trace.windows(2) {
            assert!(w[1].1 <= w[0].1);
        }
        assert!(result.objective_trace.last().unwrap().1 < result.objective_trace[0].1);
    }

    #[test]
    fn max_iterations_is_not_an_error() {
        let problem = orthonormal_problem(&[1.0, 2.0], 5, 1).unwrap();
        let opts = FitOptions { max_iter: 1, start: Start::Origin, ..FitOptions::default() };
        let result = fit(&problem, &PenaltySpec::gaussian(1.0), 1.0, &opts).unwrap();
        assert!(!result.converged);
        assert_eq!(result.iterations, 1);
    }

    #[test]
    fn kinked_penalty_at_origin_needs_convention() {
        let problem = orthonormal_problem(&[1.0], 4, 2).unwrap();
        let strict = FitOptions { start: Start::Origin, ..FitOptions::default() };
        assert!(matches!(
            fit(&problem, &PenaltySpec::lasso(), 0.1, &strict),
            Err(FitError::Penalty(PenaltyError::Singularity(_)))
        ));
        let lenient = FitOptions { kink: KinkRule::ZeroAtKink, ..strict };
        assert!(fit(&problem, &PenaltySpec::lasso(), 0.1, &lenient).is_ok());
    }

    #[test]
    fn rejects_negative_lambda_and_bad_start() {
        let problem = orthonormal_problem(&[1.0], 4, 2).unwrap();
        assert!(matches!(fit(&problem, &PenaltySpec::ridge(), -1.0, &FitOptions::default()), Err(FitError::InvalidLambda(_))));
        let opts = FitOptions { start: Start::Point(vec![0.0, 1.0]), ..FitOptions::default() };
        assert!(matches!(fit(&problem, &PenaltySpec::ridge(), 1.0, &opts), Err(FitError::StartLength { .. })));
    }

    #[test]
    fn orthonormal_problem_has_identity_gram() {
        let problem = orthonormal_problem(&[1.0, -2.0, 0.5], 9, 11).unwrap();
        let mut g = problem.x().gram();
        g.scale(1.0 / 9.0);
        assert!(g.frobenius_distance(&Matrix::identity(3)) < 1e-12);
        let c: Vec<f64> = problem.x().t_matvec(problem.y()).iter().map(|v| v / 9.0).collect();
        for (a, b) in c.iter().zip([1.0, -2.0, 0.5]) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
