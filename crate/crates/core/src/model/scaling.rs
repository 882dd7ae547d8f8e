//! Weak lower scaling certificates on finite logarithmic grids.

use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && n >= 1);
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Empirical evidence that `f(λx) ≥ θ λ^α f(x)` for `λ ≥ 1` over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCertificate {
    pub alpha: f64,
    /// Smallest observed `f(λx) / (λ^α f(x))`, i.e. the certified θ.
    pub theta: f64,
    pub worst_ratio: f64,
    pub range: (f64, f64),
    pub grid_points: usize,
}

impl ScalingCertificate {
    pub fn holds(&self) -> bool {
        self.theta > 0.0 && self.theta.is_finite()
    }
}

/// Minimum over grid pairs `x_i ≤ x_j` of `f(x_j) / ((x_j/x_i)^α f(x_i))`.
pub fn check_wlsc<F: Fn(f64) -> f64>(f: F, alpha: f64, grid: &[f64]) -> Result<ScalingCertificate> {
    let vals = evaluate_positive(&f, grid)?;
    let theta = theta_for(alpha, grid, &vals);
    Ok(ScalingCertificate {
        alpha,
        theta,
        worst_ratio: theta,
        range: (grid[0], grid[grid.len() - 1]),
        grid_points: grid.len(),
    })
}

fn evaluate_positive<F: Fn(f64) -> f64>(f: &F, grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(LevyError::InvalidParameter("empty scaling grid".into()));
    }
    grid.iter()
        .map(|&x| {
            let v = f(x);
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(LevyError::InvalidParameter(format!(
                    "scaling check needs f > 0; f({x:e}) = {v:e}"
                )))
            }
        })
        .collect()
}

fn theta_for(alpha: f64, grid: &[f64], vals: &[f64]) -> f64 {
    // min over i ≤ j of log f_j - α log x_j - (log f_i - α log x_i)
    let mut best_prefix_max = f64::NEG_INFINITY;
    let mut worst = f64::INFINITY;
    for (x, v) in grid.iter().zip(vals) {
        let g = v.ln() - alpha * x.ln();
        best_prefix_max = best_prefix_max.max(g);
        worst = worst.min(g - best_prefix_max);
    }
    worst.exp()
}

/// Largest `α` for which the grid certificate keeps `θ ≥ theta_floor`.
pub fn lower_scaling_index<F: Fn(f64) -> f64>(f: F, grid: &[f64], theta_floor: f64) -> Result<f64> {
    let vals = evaluate_positive(&f, grid)?;
    let (mut lo, mut hi) = (0.0, 4.0);
    if theta_for(lo, grid, &vals) < theta_floor {
        return Ok(0.0);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if theta_for(mid, grid, &vals) >= theta_floor {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
