//! Hypotheses checked before a claim runs. All of them are evaluated for
//! every experiment and recorded, whether or not a requested claim needs them.

use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};
use crate::model::{log_grid, lower_scaling_index, ProcessSpec, Side};

/// Frequencies over which the scaling index of `Re ψ` is certified.
pub const WLSC_RANGE: (f64, f64) = (1e-4, 1e4);
pub const WLSC_POINTS: usize = 81;
/// Smallest acceptable `θ` when searching the largest certified index.
pub const THETA_FLOOR: f64 = 0.1;
pub const MEAN_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gate {
    ZeroMean,
    Wlsc,
    UnboundedVariation,
    Symmetric,
    StrictlyStable,
}

impl Gate {
    /// The violated precondition, as recorded on a skipped claim.
    pub fn failure(self) -> &'static str {
        match self {
            Gate::ZeroMean => "E X₁ ≠ 0",
            Gate::Wlsc => "WLSC α>1 gate failed",
            Gate::UnboundedVariation => "paths of bounded variation",
            Gate::Symmetric => "process is not symmetric",
            Gate::StrictlyStable => "process is not strictly stable",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gates {
    /// `E X_1`, `None` when undefined.
    pub mean: Option<f64>,
    pub zero_mean: bool,
    /// Largest `α` with a WLSC certificate of `Re ψ` at `θ ≥ THETA_FLOOR`.
    pub wlsc_index: f64,
    pub wlsc: bool,
    pub unbounded_variation: bool,
    pub symmetric: bool,
    pub strictly_stable: bool,
}

impl Gates {
    pub fn evaluate(spec: &ProcessSpec) -> Result<Self> {
        let mean = spec.mean_x1();
        let grid = log_grid(WLSC_RANGE.0, WLSC_RANGE.1, WLSC_POINTS);
        let wlsc_index = lower_scaling_index(|x| spec.re_psi(x), &grid, THETA_FLOOR)?;
        Ok(Gates {
            mean,
            zero_mean: mean.is_some_and(|m| m.abs() <= MEAN_TOLERANCE),
            wlsc_index,
            wlsc: wlsc_index > 1.0,
            unbounded_variation: spec.has_unbounded_variation(),
            symmetric: spec.is_symmetric(),
            strictly_stable: spec.stable_parameters().is_some(),
        })
    }

    pub fn passes(&self, gate: Gate) -> bool {
        match gate {
            Gate::ZeroMean => self.zero_mean,
            Gate::Wlsc => self.wlsc,
            Gate::UnboundedVariation => self.unbounded_variation,
            Gate::Symmetric => self.symmetric,
            Gate::StrictlyStable => self.strictly_stable,
        }
    }

    /// The first violated gate among `required`.
    pub fn first_failure(&self, required: &[Gate]) -> Option<Gate> {
        required.iter().copied().find(|g| !self.passes(*g))
    }
}

fn negative_components(spec: &ProcessSpec) -> Result<Vec<crate::model::PowerComponent>> {
    let comps = spec
        .measure()
        .components()
        .ok_or_else(|| LevyError::Unsupported("tail hypotheses need a measure made of power components".into()))?;
    Ok(comps.iter().filter(|c| c.side == Side::Negative).cloned().collect())
}

/// `sup_r ν(r,∞) ln(r + 1/r)^{1+β} / ν(-∞,-r)` over `r ∈ [1e-6, 1e6]`,
/// infinite when the profile still grows toward either end of the range
/// or the lower tail vanishes where the upper one does not.
pub fn log_tail_domination(spec: &ProcessSpec, beta: f64) -> f64 {
    let m = spec.measure();
    let rs = log_grid(1e-6, 1e6, 121);
    let mut vals = Vec::with_capacity(rs.len());
    for &r in &rs {
        let up = m.upper_tail(r);
        if up == 0.0 {
            vals.push(0.0);
            continue;
        }
        let down = m.lower_tail(r);
        if down == 0.0 {
            return f64::INFINITY;
        }
        vals.push(up * (r + 1.0 / r).ln().powf(1.0 + beta) / down);
    }
    let n = vals.len();
    // a bounded profile is non-increasing toward both ends of a wide range
    if vals[0] > vals[5] * (1.0 + 1e-9) || vals[n - 1] > vals[n - 6] * (1.0 + 1e-9) {
        return f64::INFINITY;
    }
    vals.into_iter().fold(0.0, f64::max)
}

/// `f(x) = x² ∫_0^{1/x} u ν(-∞,-u) du = (ν(-∞,-1/x) + x² ∫_{-1/x}^0 u² ν(du)) / 2`.
pub fn closing_scaling_function(spec: &ProcessSpec) -> Result<impl Fn(f64) -> f64> {
    let neg = negative_components(spec)?;
    Ok(move |x: f64| {
        let a = 1.0 / x;
        let tail: f64 = neg.iter().map(|c| c.tail(a)).sum();
        let m2: f64 = neg.iter().map(|c| c.second_moment_below(a)).sum();
        0.5 * (tail + x * x * m2)
    })
}

/// Largest certified lower scaling index of [`closing_scaling_function`].
pub fn closing_scaling_index(spec: &ProcessSpec) -> Result<f64> {
    let f = closing_scaling_function(spec)?;
    lower_scaling_index(f, &log_grid(WLSC_RANGE.0, WLSC_RANGE.1, WLSC_POINTS), THETA_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::presets::preset;
    use crate::quad::{integrate_log_scale, Tolerance};
    use approx::assert_relative_eq;

    #[test]
    fn gate_table() {
        let g = Gates::evaluate(&preset("symmetric-stable-1.5").unwrap()).unwrap();
        assert!(g.zero_mean && g.wlsc && g.unbounded_variation && g.symmetric && g.strictly_stable);
        // θ = 0.1 buys 1/8 of an exponent over eight decades
        assert!((g.wlsc_index - 1.625).abs() < 1e-6, "{}", g.wlsc_index);
        let g = Gates::evaluate(&preset("stable-0.8").unwrap()).unwrap();
        assert!(!g.zero_mean && !g.wlsc);
        assert_eq!(g.first_failure(&[Gate::Wlsc, Gate::ZeroMean]), Some(Gate::Wlsc));
        let g = Gates::evaluate(&preset("cgmy").unwrap()).unwrap();
        assert!(g.zero_mean && g.wlsc && !g.symmetric && !g.strictly_stable);
    }

    #[test]
    fn closing_tail_gate_separates_presets() {
        let ok = log_tail_domination(&preset("closing-example").unwrap(), 0.5);
        assert!(ok.is_finite() && ok > 0.0);
        assert!(log_tail_domination(&preset("closing-example-symmetric").unwrap(), 0.5).is_infinite());
        assert!(log_tail_domination(&preset("cgmy").unwrap(), 0.5).is_infinite());
    }

    #[test]
    fn closing_function_matches_direct_integral() {
        let s = preset("closing-example").unwrap();
        let f = closing_scaling_function(&s).unwrap();
        for &x in &[0.01, 1.0, 50.0] {
            let direct = integrate_log_scale(
                |u: f64| u * s.measure().lower_tail(u),
                1e-12,
                1.0 / x,
                &[],
                Tolerance::new(1e-300, 1e-10),
            )
            .unwrap()
            .value;
            assert_relative_eq!(f(x), x * x * direct, max_relative = 1e-6);
        }
        let idx = closing_scaling_index(&s).unwrap();
        assert!(idx > 1.0 && idx < 2.0 + 1e-9, "{idx}");
    }
}
