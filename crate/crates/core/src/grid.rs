//! Tuning-parameter grids.

use alloc::vec::Vec;

use crate::math;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("log grid needs 0 < min < max, got min = {min}, max = {max}")]
    Bounds { min: f64, max: f64 },
    #[error("grid needs at least {required} points, got {count}")]
    TooFewPoints { required: usize, count: usize },
    #[error("linear grid needs a finite positive step and start <= stop, got start = {start}, stop = {stop}, step = {step}")]
    Linear { start: f64, stop: f64, step: f64 },
}

/// Geometric sequence from `min` to `max` inclusive with `count` points.
pub fn loggrid(min: f64, max: f64, count: usize) -> Result<Vec<f64>, GridError> {
    if !(min > 0.0 && max > min && max.is_finite()) {
        return Err(GridError::Bounds { min, max });
    }
    if count < 2 {
        return Err(GridError::TooFewPoints { required: 2, count });
    }
    let ratio = max / min;
    let last = (count - 1) as f64;
    let mut grid: Vec<f64> = (0..count)
        .map(|k| min * math::powf(ratio, k as f64 / last))
        .collect();
    grid[0] = min;
    grid[count - 1] = max;
    Ok(grid)
}

/// `start, start + step, …` up to and including `stop` (to within half a step).
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, GridError> {
    if !(step > 0.0 && step.is_finite() && start.is_finite() && stop.is_finite() && start <= stop) {
        return Err(GridError::Linear { start, stop, step });
    }
    let steps = libm::round((stop - start) / step) as usize;
    Ok((0..=steps).map(|k| start + k as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loggrid_examples() {
        let g = loggrid(0.01, 1.0, 3).unwrap();
        assert_eq!(g.len(), 3);
        for (a, b) in g.iter().zip([0.01, 0.1, 1.0]) {
            assert!((a - b).abs() <= 1e-15 * b);
        }
        assert_eq!(loggrid(1.0, 1.0001, 2).unwrap(), vec![1.0, 1.0001]);
        let g = loggrid(1e-4, 1e2, 7).unwrap();
        for w in g.windows(2) {
            assert!((w[1] / w[0] - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn loggrid_errors() {
        assert!(loggrid(0.0, 1.0, 3).is_err());
        assert!(loggrid(2.0, 1.0, 3).is_err());
        assert!(loggrid(1.0, 1.0, 3).is_err());
        assert_eq!(loggrid(0.1, 1.0, 1).unwrap_err(), GridError::TooFewPoints { required: 2, count: 1 });
    }

    #[test]
    fn linear_grid_inclusive() {
        let g = linear_grid(0.1, 15.1, 1.0).unwrap();
        assert_eq!(g.len(), 16);
        assert!((g[15] - 15.1).abs() < 1e-12);
        assert!(linear_grid(1.0, 0.0, 1.0).is_err());
    }
}
