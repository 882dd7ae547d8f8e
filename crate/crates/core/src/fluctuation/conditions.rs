//! Integral conditions for creeping and for linear growth of `V` at infinity,
//! classified from dyadic partial integrals.

use serde::{Deserialize, Serialize};

use super::renewal::{least_squares_slope, RenewalFunction};
use crate::concentration::h;
use crate::error::Result;
use crate::model::ProcessSpec;
use crate::quad::{integrate_log_scale, Tolerance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionVerdict {
    Holds,
    Fails,
    Inconclusive,
    HypothesisNotMet,
}

/// Dyadic decay slope below which the partial integrals are taken to converge.
pub const CONVERGENT_SLOPE: f64 = -0.1;
/// Dyadic decay slope above which the partial integrals are taken to diverge.
pub const DIVERGENT_SLOPE: f64 = -0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub id: String,
    pub verdict: ConditionVerdict,
    /// `(endpoint, partial integral)` for `ε = 2^{-k}` or `R = 2^k`.
    pub partial_integrals: Vec<(f64, f64)>,
    /// Fitted `log2` slope of the dyadic increments in `k`.
    pub increment_slope: f64,
    /// Log-log slope of `V` at the matching end of its grid.
    pub v_slope: f64,
    /// Largest `ν(z,∞) / ν(-∞,-z)` over the hypothesis grid, if checked.
    pub tail_ratio: Option<f64>,
}

impl ConditionReport {
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let rows: Vec<Vec<f64>> = self.partial_integrals.iter().map(|&(e, v)| vec![e, v]).collect();
        crate::report::write_table(path, &["endpoint", "partial_integral"], &rows)
    }
}

/// `ν(y,∞) / (y h(y))`.
fn integrand(spec: &ProcessSpec, y: f64) -> Result<f64> {
    let tail = spec.measure().upper_tail(y);
    if tail == 0.0 {
        return Ok(0.0);
    }
    Ok(tail / (y * h(spec, y)?))
}

fn dyadic_piece(spec: &ProcessSpec, a: f64, b: f64) -> Result<f64> {
    let err = std::cell::Cell::new(None);
    let v = integrate_log_scale(
        |y: f64| match integrand(spec, y) {
            Ok(v) => v,
            Err(e) => {
                err.set(Some(e));
                0.0
            }
        },
        a,
        b,
        &[],
        Tolerance::new(1e-300, 1e-9),
    )?
    .value;
    match err.take() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Classifies from increments `d_k` over successive dyadic pieces.
fn classify(increments: &[f64]) -> (ConditionVerdict, f64) {
    if increments.iter().all(|d| *d == 0.0) {
        return (ConditionVerdict::Holds, f64::NEG_INFINITY);
    }
    // fit over the second half, where the asymptotic regime is reached
    let tail = &increments[increments.len() / 2..];
    // increments that underflow to zero for good decay faster than any power of 2
    if tail.last() == Some(&0.0) {
        let first_zero = tail.iter().position(|d| *d == 0.0).unwrap_or(tail.len());
        if tail[first_zero..].iter().all(|d| *d == 0.0) && tail[..first_zero].iter().all(|d| *d > 0.0) {
            return (ConditionVerdict::Holds, f64::NEG_INFINITY);
        }
    }
    if tail.iter().any(|d| *d <= 0.0) {
        return (ConditionVerdict::Inconclusive, f64::NAN);
    }
    let pts: Vec<(f64, f64)> = tail.iter().enumerate().map(|(k, d)| (k as f64, d.log2())).collect();
    let s = least_squares_slope(&pts);
    let v = if s <= CONVERGENT_SLOPE {
        ConditionVerdict::Holds
    } else if s >= DIVERGENT_SLOPE {
        ConditionVerdict::Fails
    } else {
        ConditionVerdict::Inconclusive
    };
    (v, s)
}

/// `∫_ε^1 ν(y,∞)/(y h(y)) dy` for `ε = 2^{-k}`, `k = 4..=24`, paired with the
/// small-`x` slope of `V`.
pub fn creeping_condition(spec: &ProcessSpec, v: &RenewalFunction) -> Result<ConditionReport> {
    let first = dyadic_piece(spec, 2f64.powi(-4), 1.0)?;
    let pieces = crate::parallel::try_map(&(5..=24).collect::<Vec<i32>>(), |&k| {
        dyadic_piece(spec, 2f64.powi(-k), 2f64.powi(1 - k))
    })?;
    let mut acc = first;
    let mut partial = vec![(2f64.powi(-4), acc)];
    for (k, d) in (5..=24).zip(&pieces) {
        acc += d;
        partial.push((2f64.powi(-k), acc));
    }
    let (verdict, slope) = classify(&pieces);
    Ok(ConditionReport {
        id: "creeping".into(),
        verdict,
        partial_integrals: partial,
        increment_slope: slope,
        v_slope: v.slope(v.xs[0], v.xs[0] * 100.0),
        tail_ratio: None,
    })
}

/// `∫_1^R ν(y,∞)/(y h(y)) dy` for `R = 2^k`, `k = 1..=24`, under the
/// hypothesis `ν(z,∞) ≤ C ν(-∞,-z)` for large `z`; paired with the large-`x`
/// slope of `V`.
pub fn linearity_large_condition(spec: &ProcessSpec, v: &RenewalFunction) -> Result<ConditionReport> {
    let ks: Vec<i32> = (1..=24).collect();
    let pieces = crate::parallel::try_map(&ks, |&k| dyadic_piece(spec, 2f64.powi(k - 1), 2f64.powi(k)))?;
    let mut acc = 0.0;
    let mut partial = Vec::new();
    for (k, d) in ks.iter().zip(&pieces) {
        acc += d;
        partial.push((2f64.powi(*k), acc));
    }
    let (mut verdict, slope) = classify(&pieces);
    let tail_ratio = tail_domination(spec);
    if !tail_ratio.is_finite() {
        verdict = ConditionVerdict::HypothesisNotMet;
    }
    let n = v.xs.len();
    Ok(ConditionReport {
        id: "linearity-large".into(),
        verdict,
        partial_integrals: partial,
        increment_slope: slope,
        v_slope: v.slope(v.xs[n - 1] / 100.0, v.xs[n - 1]),
        tail_ratio: Some(tail_ratio),
    })
}

/// Largest `ν(z,∞)/ν(-∞,-z)` over `z = 2^k`, `k = 0..=24`; infinite when the
/// ratio is unbounded (growing over the last decade or a vanishing lower tail).
pub fn tail_domination(spec: &ProcessSpec) -> f64 {
    let m = spec.measure();
    let mut ratios = Vec::new();
    for k in 0..=24 {
        let z = 2f64.powi(k);
        let (up, down) = (m.upper_tail(z), m.lower_tail(z));
        if up == 0.0 {
            ratios.push(0.0);
        } else if down == 0.0 {
            return f64::INFINITY;
        } else {
            ratios.push(up / down);
        }
    }
    let last = &ratios[ratios.len() - 8..];
    if last.iter().all(|r| *r > 0.0) {
        let pts: Vec<(f64, f64)> = last.iter().enumerate().map(|(k, r)| (k as f64, r.log2())).collect();
        if least_squares_slope(&pts) > 0.01 {
            return f64::INFINITY;
        }
    }
    ratios.into_iter().fold(0.0, f64::max)
}
