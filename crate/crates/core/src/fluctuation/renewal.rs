//! Renewal functions `V` tabulated by Laplace inversion of `1/(λ κ(0,λ))`.

use std::collections::HashMap;
use std::f64::consts::{LN_2, SQRT_2};

use serde::{Deserialize, Serialize};

use super::LadderExponent;
use crate::error::{LevyError, Result};
use crate::interp::Pchip;
use crate::laplace::{invert_rate, MAX_ORDER};
use crate::special::gamma_fn;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RenewalMethod {
    LaplaceInversion,
    StableClosedForm,
    SymmetricSqrtH,
}

/// Half-octave exponents `j` of the default grid `x_j = 2^{j/2}`, about
/// `1e-6 ..= 1e6`.
pub const DEFAULT_HALF_OCTAVES: (i32, i32) = (-40, 40);

/// A non-decreasing function on `(0, ∞)` tabulated on a log grid, with
/// monotone interpolation in log-log coordinates and power-law extrapolation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenewalFunction {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub method: RenewalMethod,
    /// Largest relative disagreement between the two inversion orders.
    pub tolerance: f64,
    /// Whether a monotone rearrangement was applied.
    pub rearranged: bool,
    #[serde(skip)]
    interp: Option<Pchip>,
}

/// `x_j = 2^{j/2}` and the Stehfest rate `ln 2 / x_j`, computed so that the
/// rates `k ln 2 / x_j` coincide bitwise across nodes.
fn node(j: i32) -> (f64, f64) {
    let x = if j % 2 == 0 {
        2f64.powi(j / 2)
    } else {
        SQRT_2 * 2f64.powi(j.div_euclid(2))
    };
    let rate = if j % 2 == 0 {
        LN_2 * 2f64.powi(-j / 2)
    } else {
        (LN_2 / SQRT_2) * 2f64.powi(-j.div_euclid(2))
    };
    (x, rate)
}

impl RenewalFunction {
    pub fn from_values(xs: Vec<f64>, values: Vec<f64>, method: RenewalMethod, tolerance: f64) -> Result<Self> {
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(LevyError::InvalidParameter("renewal values must be positive and finite".into()));
        }
        let mut values = values;
        let rearranged = values.windows(2).any(|w| w[1] < w[0]);
        if rearranged {
            values.sort_by(f64::total_cmp);
        }
        let mut f = RenewalFunction {
            xs,
            values,
            method,
            tolerance,
            rearranged,
            interp: None,
        };
        f.interp = Some(f.make_interp());
        Ok(f)
    }

    fn make_interp(&self) -> Pchip {
        Pchip::new(
            self.xs.iter().map(|x| x.ln()).collect(),
            self.values.iter().map(|v| v.ln()).collect(),
        )
    }

    /// Inverts `x ↦ ∫_0^∞ e^{-λx} V(x) dx = transform(λ)` on the half-octave
    /// nodes `j_lo..=j_hi`. Transform evaluations are shared between nodes and
    /// computed in parallel.
    pub fn from_transform<F>(transform: F, j_lo: i32, j_hi: i32) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync + Send,
    {
        let nodes: Vec<(f64, f64)> = (j_lo..=j_hi).map(node).collect();
        let mut keys: Vec<u64> = Vec::new();
        for &(_, a) in &nodes {
            for k in 1..=MAX_ORDER {
                keys.push((a * k as f64).to_bits());
            }
        }
        keys.sort_unstable();
        keys.dedup();
        let vals = crate::parallel::try_map(&keys, |&b| transform(f64::from_bits(b)))?;
        let table: HashMap<u64, f64> = keys.into_iter().zip(vals).collect();
        let lookup = |l: f64| -> Result<f64> {
            table
                .get(&l.to_bits())
                .copied()
                .ok_or_else(|| LevyError::InvalidParameter(format!("transform not tabulated at {l:e}")))
        };
        let mut xs = Vec::with_capacity(nodes.len());
        let mut values = Vec::with_capacity(nodes.len());
        let mut worst: f64 = 0.0;
        for &(x, a) in &nodes {
            let inv = invert_rate(&lookup, a)?;
            worst = worst.max(inv.discrepancy);
            xs.push(x);
            values.push(inv.value);
        }
        Self::from_values(xs, values, RenewalMethod::LaplaceInversion, worst)
    }

    /// `V(x) = x^e / (k Γ(1+e))`, the renewal function of `κ(0,λ) = k λ^e`.
    pub fn power_law(k: f64, e: f64, j_lo: i32, j_hi: i32) -> Self {
        let xs: Vec<f64> = (j_lo..=j_hi).map(|j| node(j).0).collect();
        let c = 1.0 / (k * gamma_fn(1.0 + e));
        let values = xs.iter().map(|x| c * x.powf(e)).collect();
        Self::from_values(xs, values, RenewalMethod::StableClosedForm, 0.0).expect("positive values")
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let n = self.xs.len();
        let lx = x.ln();
        let (l0, ln) = (self.xs[0].ln(), self.xs[n - 1].ln());
        if lx < l0 {
            let s = self.slope_between(0, 1);
            return (self.values[0].ln() + s * (lx - l0)).exp();
        }
        if lx > ln {
            let s = self.slope_between(n - 2, n - 1);
            return (self.values[n - 1].ln() + s * (lx - ln)).exp();
        }
        let v = match &self.interp {
            Some(p) => p.eval(lx),
            None => self.make_interp().eval(lx),
        };
        v.exp()
    }

    fn slope_between(&self, i: usize, j: usize) -> f64 {
        (self.values[j] / self.values[i]).ln() / (self.xs[j] / self.xs[i]).ln()
    }

    /// Least-squares log-log slope over the nodes inside `[lo, hi]`.
    pub fn slope(&self, lo: f64, hi: f64) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .xs
            .iter()
            .zip(&self.values)
            .filter(|(x, _)| **x >= lo * (1.0 - 1e-12) && **x <= hi * (1.0 + 1e-12))
            .map(|(x, v)| (x.ln(), v.ln()))
            .collect();
        least_squares_slope(&pts)
    }

    /// Largest relative excess `(V(x+y) - V(x) - V(y)) / (V(x) + V(y))` over node pairs.
    pub fn subadditivity_excess(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (i, &x) in self.xs.iter().enumerate().step_by(2) {
            for &y in self.xs[i..].iter().step_by(2) {
                let sum = self.eval(x) + self.eval(y);
                worst = worst.max((self.eval(x + y) - sum) / sum);
            }
        }
        worst
    }

    /// Largest `V(λx) / (2λ V(x))` over nodes and `λ ≥ 1`.
    pub fn growth_excess(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for &x in &self.xs {
            for &l in &[1.0, 1.5, 2.0, 4.0, 16.0, 100.0] {
                worst = worst.max(self.eval(l * x) / (2.0 * l * self.eval(x)));
            }
        }
        worst
    }

    /// Monotone, subadditive and `V(λx) ≤ 2λV(x)` up to `tol`.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        if self.values.windows(2).any(|w| w[1] < w[0]) {
            return Err(LevyError::InvalidParameter("renewal table is not monotone".into()));
        }
        let s = self.subadditivity_excess();
        if s > tol {
            return Err(LevyError::InvalidParameter(format!("subadditivity violated by {s:e}")));
        }
        let g = self.growth_excess();
        if g > 1.0 + tol {
            return Err(LevyError::InvalidParameter(format!("V(λx) ≤ 2λV(x) violated, ratio {g}")));
        }
        Ok(())
    }
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `V` of the process: inversion of `1/(λ κ(0,λ))` on the default grid.
pub fn renewal_v(ladder: &LadderExponent) -> Result<RenewalFunction> {
    renewal_v_on(ladder, DEFAULT_HALF_OCTAVES.0, DEFAULT_HALF_OCTAVES.1)
}

pub fn renewal_v_on(ladder: &LadderExponent, j_lo: i32, j_hi: i32) -> Result<RenewalFunction> {
    RenewalFunction::from_transform(|l| Ok(1.0 / (l * ladder.kappa_space(l)?)), j_lo, j_hi)
}

/// `V̂`, the renewal function of the dual process.
pub fn renewal_v_hat(ladder: &LadderExponent) -> Result<RenewalFunction> {
    renewal_v(&ladder.dual())
}

/// Closed-form `V` for a strictly stable process: `κ(0,λ) = κ(0,1) λ^{αρ}`.
pub fn stable_renewal(ladder: &LadderExponent) -> Option<RenewalFunction> {
    let (alpha, _, _) = ladder.spec().stable_parameters()?;
    let rho = ladder.spec().stable_positivity()?;
    Some(RenewalFunction::power_law(
        ladder.space_constant(),
        alpha * rho,
        DEFAULT_HALF_OCTAVES.0,
        DEFAULT_HALF_OCTAVES.1,
    ))
}

/// The comparison function `1/√h(r)` of a symmetric process.
pub fn symmetric_sqrt_h(spec: &crate::model::ProcessSpec) -> Result<RenewalFunction> {
    let xs: Vec<f64> = (DEFAULT_HALF_OCTAVES.0..=DEFAULT_HALF_OCTAVES.1).map(|j| node(j).0).collect();
    let values = xs
        .iter()
        .map(|&x| Ok(1.0 / crate::concentration::h(spec, x)?.sqrt()))
        .collect::<Result<Vec<f64>>>()?;
    RenewalFunction::from_values(xs, values, RenewalMethod::SymmetricSqrtH, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Family, ProcessSpec};
    use approx::assert_relative_eq;

    fn stable(alpha: f64, beta: f64) -> ProcessSpec {
        ProcessSpec::new(Family::Stable { alpha, beta, scale: 1.0 }).unwrap()
    }

    #[test]
    fn nodes_share_rates() {
        for j in -9..9 {
            let (x, a) = node(j);
            assert_relative_eq!(x * a, LN_2, max_relative = 1e-15);
            let (_, a2) = node(j + 2);
            assert_eq!((2.0 * a2).to_bits(), a.to_bits());
        }
    }

    #[test]
    fn exact_pair_through_table() {
        for &alpha in &[1.2, 1.5, 1.8] {
            let e: f64 = alpha / 2.0;
            let v = RenewalFunction::from_transform(|l| Ok(l.powf(-1.0 - e)), -20, 20).unwrap();
            for &r in &[1e-3, 0.37, 1.0, 5.5, 900.0] {
                assert_relative_eq!(v.eval(r), r.powf(e) / gamma_fn(1.0 + e), max_relative = 1e-4);
            }
            assert!(v.tolerance < 1e-4);
        }
    }

    #[test]
    fn symmetric_stable_renewal() {
        let l = LadderExponent::new(&stable(1.5, 0.0)).unwrap();
        let v = renewal_v_on(&l, -20, 20).unwrap();
        let vh = renewal_v_on(&l.dual(), -20, 20).unwrap();
        assert_eq!(v.eval(0.0), 0.0);
        for (a, b) in v.values.iter().zip(&vh.values) {
            assert_relative_eq!(a, b, max_relative = 1e-6);
        }
        for &r in &v.xs {
            assert_relative_eq!(v.eval(r), r.powf(0.75) / gamma_fn(1.75), max_relative = 1e-4);
        }
        v.check_invariants(1e-6).unwrap();
    }

    #[test]
    fn skewed_stable_slopes() {
        let s = stable(1.5, 0.5);
        let l = LadderExponent::new(&s).unwrap();
        let rho = s.stable_positivity().unwrap();
        let v = renewal_v_on(&l, -16, 16).unwrap();
        let vh = renewal_v_on(&l.dual(), -16, 16).unwrap();
        assert!((v.slope(1e-2, 1e2) - 1.5 * rho).abs() < 0.01);
        assert!((vh.slope(1e-2, 1e2) - 1.5 * (1.0 - rho)).abs() < 0.01);
        let exact = stable_renewal(&l).unwrap();
        for &r in &[0.01, 1.0, 50.0] {
            assert_relative_eq!(v.eval(r), exact.eval(r), max_relative = 1e-4);
        }
    }

    #[test]
    fn brownian_renewal_is_identity() {
        let l = LadderExponent::new(&ProcessSpec::new(Family::brownian()).unwrap()).unwrap();
        let v = renewal_v_on(&l, -10, 10).unwrap();
        for &r in &[0.1, 1.0, 7.0] {
            assert_relative_eq!(v.eval(r), r, max_relative = 1e-5);
        }
    }

    #[test]
    fn rearrangement_flagged() {
        let f = RenewalFunction::from_values(vec![1.0, 2.0, 3.0], vec![1.0, 0.999, 2.0], RenewalMethod::LaplaceInversion, 0.0)
            .unwrap();
        assert!(f.rearranged);
        assert!(f.values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn extrapolates_power_laws() {
        let f = RenewalFunction::power_law(1.0, 0.5, -4, 4);
        let c = 1.0 / gamma_fn(1.5);
        assert_relative_eq!(f.eval(1e-4), c * 1e-2, max_relative = 1e-9);
        assert_relative_eq!(f.eval(1e6), c * 1e3, max_relative = 1e-9);
    }
}
