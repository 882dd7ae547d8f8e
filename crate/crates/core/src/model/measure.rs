//! Lévy measures as finite sums of tempered power-law components, plus an
//! escape hatch for arbitrary densities evaluated purely by quadrature.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};
use crate::quad::{integrate, integrate_to_infinity, Tolerance};
use crate::special::{
    compensated_log, compensated_pow, compensated_xlogx, gamma_fn, lower_gamma, upper_gamma,
    EULER_GAMMA,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Positive,
    Negative,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Positive => 1.0,
            Side::Negative => -1.0,
        }
    }

    pub fn flip(self) -> Side {
        match self {
            Side::Positive => Side::Negative,
            Side::Negative => Side::Positive,
        }
    }
}

/// Density `weight · |x|^{-1-index} · exp(-tempering · |x|)` on one half-line.
///
/// `index < 2` always; an untempered component needs `index ∈ (0, 2)`.
/// Negative indices give finite-activity laws (`index = -1` is an
/// exponential jump distribution).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerComponent {
    pub side: Side,
    pub weight: f64,
    pub index: f64,
    #[serde(default)]
    pub tempering: f64,
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

impl PowerComponent {
    pub fn new(side: Side, weight: f64, index: f64, tempering: f64) -> Result<Self> {
        let c = PowerComponent {
            side,
            weight,
            index,
            tempering,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let ok_numbers = self.weight.is_finite() && self.index.is_finite() && self.tempering.is_finite();
        if !ok_numbers || self.weight <= 0.0 || self.tempering < 0.0 {
            return Err(LevyError::InvalidParameter(format!(
                "component needs weight > 0 and tempering >= 0: {self:?}"
            )));
        }
        if self.index >= 2.0 {
            return Err(LevyError::InvalidParameter(format!(
                "index {} >= 2 violates ∫(1∧x²)ν < ∞",
                self.index
            )));
        }
        if self.tempering == 0.0 && self.index <= 0.0 {
            return Err(LevyError::InvalidParameter(format!(
                "untempered component with index {} has infinite mass at infinity",
                self.index
            )));
        }
        Ok(())
    }

    /// Density at distance `u > 0` from the origin on this component's side.
    pub fn density(&self, u: f64) -> f64 {
        self.weight * u.powf(-1.0 - self.index) * (-self.tempering * u).exp()
    }

    /// `ν_c(r, ∞)` measured along the component's side.
    pub fn tail(&self, r: f64) -> f64 {
        let (c, y, l) = (self.weight, self.index, self.tempering);
        if l == 0.0 {
            c * r.powf(-y) / y
        } else {
            c * l.powf(y) * upper_gamma(-y, l * r)
        }
    }

    /// `∫_0^r u² ν_c(du)`.
    pub fn second_moment_below(&self, r: f64) -> f64 {
        let (c, y, l) = (self.weight, self.index, self.tempering);
        if l == 0.0 {
            c * r.powf(2.0 - y) / (2.0 - y)
        } else {
            c * l.powf(y - 2.0) * lower_gamma(2.0 - y, l * r)
        }
    }

    /// `∫_a^b u ν_c(du)` for `0 < a < b ≤ ∞`; `None` when infinite.
    pub fn first_moment_between(&self, a: f64, b: f64) -> Option<f64> {
        let (c, y, l) = (self.weight, self.index, self.tempering);
        if a >= b {
            return Some(0.0);
        }
        if a <= 0.0 {
            let below = self.first_moment_below(b.min(1.0))?;
            let above = if b > 1.0 { self.first_moment_between(1.0, b)? } else { 0.0 };
            return Some(below + above);
        }
        if l == 0.0 {
            if b.is_infinite() {
                return (y > 1.0).then(|| c * a.powf(1.0 - y) / (y - 1.0));
            }
            if near(y, 1.0) {
                return Some(c * (b / a).ln());
            }
            return Some(c * (b.powf(1.0 - y) - a.powf(1.0 - y)) / (1.0 - y));
        }
        let upper_b = if b.is_infinite() { 0.0 } else { upper_gamma(1.0 - y, l * b) };
        Some(c * l.powf(y - 1.0) * (upper_gamma(1.0 - y, l * a) - upper_b))
    }

    /// `∫_0^r u ν_c(du)`; `None` when the small jumps have infinite variation.
    pub fn first_moment_below(&self, r: f64) -> Option<f64> {
        let (c, y, l) = (self.weight, self.index, self.tempering);
        if y >= 1.0 {
            return None;
        }
        if l == 0.0 {
            Some(c * r.powf(1.0 - y) / (1.0 - y))
        } else {
            Some(c * l.powf(y - 1.0) * lower_gamma(1.0 - y, l * r))
        }
    }

    pub fn total_mass(&self) -> Option<f64> {
        let (c, y, l) = (self.weight, self.index, self.tempering);
        (y < 0.0 && l > 0.0).then(|| c * l.powf(y) * gamma_fn(-y))
    }

    /// `∫ (e^{iξx} - 1 - iξx 1_{|x|<1}) ν_c(dx)` in closed form.
    pub fn truncated_exponent(&self, xi: f64) -> Complex64 {
        if xi == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let (c, y, l) = (self.weight, self.index, self.tempering);
        let s = self.side.sign();
        let omega = s * xi;
        let i = Complex64::i();
        if l > 0.0 {
            let w = Complex64::new(0.0, -omega / l);
            let full = if near(y, 0.0) {
                -compensated_log(w) * c
            } else if near(y, 1.0) {
                compensated_xlogx(w) * (c * l)
            } else {
                compensated_pow(y, w) * (c * gamma_fn(-y) * l.powf(y))
            };
            let m1 = self.first_moment_between(1.0, f64::INFINITY).unwrap_or(0.0);
            return full + i * (xi * s * m1);
        }
        let abs = omega.abs();
        let sgn = omega.signum();
        if near(y, 1.0) {
            return Complex64::new(-PI * abs / 2.0, omega * (1.0 - EULER_GAMMA - abs.ln())) * c;
        }
        let power = Complex64::from_polar(c * gamma_fn(-y) * abs.powf(y), -PI * y * sgn / 2.0);
        if y > 1.0 {
            power + i * (xi * s * c / (y - 1.0))
        } else {
            power - i * (xi * s * c / (1.0 - y))
        }
    }

    pub fn reflected(&self) -> PowerComponent {
        PowerComponent {
            side: self.side.flip(),
            ..*self
        }
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied Lévy density with its two tail functions.
#[derive(Clone)]
pub struct CustomMeasure {
    pub label: String,
    density: RealFn,
    upper_tail: RealFn,
    lower_tail: RealFn,
}

impl fmt::Debug for CustomMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomMeasure").field("label", &self.label).finish()
    }
}

impl CustomMeasure {
    pub fn new(
        label: impl Into<String>,
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        upper_tail: impl Fn(f64) -> f64 + Send + Sync + 'static,
        lower_tail: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CustomMeasure {
            label: label.into(),
            density: Arc::new(density),
            upper_tail: Arc::new(upper_tail),
            lower_tail: Arc::new(lower_tail),
        }
    }
}

#[derive(Debug, Clone)]
pub enum LevyMeasure {
    Power(Vec<PowerComponent>),
    Custom(CustomMeasure),
}

fn quad_tol() -> Tolerance {
    Tolerance::new(1e-12, 1e-10).with_max_intervals(5000)
}

impl LevyMeasure {
    pub fn zero() -> Self {
        LevyMeasure::Power(Vec::new())
    }

    pub fn components(&self) -> Option<&[PowerComponent]> {
        match self {
            LevyMeasure::Power(c) => Some(c),
            LevyMeasure::Custom(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, LevyMeasure::Power(c) if c.is_empty())
    }

    pub fn density(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        match self {
            LevyMeasure::Power(cs) => {
                let side = if x > 0.0 { Side::Positive } else { Side::Negative };
                cs.iter().filter(|c| c.side == side).map(|c| c.density(x.abs())).sum()
            }
            LevyMeasure::Custom(m) => (m.density)(x),
        }
    }

    /// `ν(r, ∞)`.
    pub fn upper_tail(&self, r: f64) -> f64 {
        match self {
            LevyMeasure::Power(cs) => cs
                .iter()
                .filter(|c| c.side == Side::Positive)
                .map(|c| c.tail(r))
                .sum(),
            LevyMeasure::Custom(m) => (m.upper_tail)(r),
        }
    }

    /// `ν(-∞, -r)`.
    pub fn lower_tail(&self, r: f64) -> f64 {
        match self {
            LevyMeasure::Power(cs) => cs
                .iter()
                .filter(|c| c.side == Side::Negative)
                .map(|c| c.tail(r))
                .sum(),
            LevyMeasure::Custom(m) => (m.lower_tail)(r),
        }
    }

    pub fn tail(&self, side: Side, r: f64) -> f64 {
        match side {
            Side::Positive => self.upper_tail(r),
            Side::Negative => self.lower_tail(r),
        }
    }

    fn symmetric_density_sum(&self, u: f64) -> f64 {
        self.density(u) + self.density(-u)
    }

    fn odd_density_diff(&self, u: f64) -> f64 {
        self.density(u) - self.density(-u)
    }

    /// `∫_{|x|<r} x² ν(dx)`.
    pub fn second_moment_below(&self, r: f64) -> Result<f64> {
        match self {
            LevyMeasure::Power(cs) => Ok(cs.iter().map(|c| c.second_moment_below(r)).sum()),
            LevyMeasure::Custom(_) => {
                Ok(integrate(|u: f64| u * u * self.symmetric_density_sum(u), 0.0, r, quad_tol())?.value)
            }
        }
    }

    /// Signed `∫_{a ≤ |x| < b} x ν(dx)`; `None` if it diverges.
    pub fn signed_first_moment(&self, a: f64, b: f64) -> Result<Option<f64>> {
        match self {
            LevyMeasure::Power(cs) => {
                let mut total = 0.0;
                for c in cs {
                    match c.first_moment_between(a, b) {
                        Some(v) => total += c.side.sign() * v,
                        None => return Ok(None),
                    }
                }
                Ok(Some(total))
            }
            LevyMeasure::Custom(_) => {
                let f = |u: f64| u * self.odd_density_diff(u);
                let v = if b.is_infinite() {
                    match integrate_to_infinity(f, a, quad_tol()) {
                        Ok(e) => e.value,
                        Err(_) => return Ok(None),
                    }
                } else {
                    integrate(f, a, b, quad_tol())?.value
                };
                Ok(Some(v))
            }
        }
    }

    /// `∫_{|x| ≥ r} |x| ν(dx)`; `None` when infinite.
    pub fn abs_first_moment_above(&self, r: f64) -> Result<Option<f64>> {
        match self {
            LevyMeasure::Power(cs) => {
                let mut total = 0.0;
                for c in cs {
                    match c.first_moment_between(r, f64::INFINITY) {
                        Some(v) => total += v,
                        None => return Ok(None),
                    }
                }
                Ok(Some(total))
            }
            LevyMeasure::Custom(_) => {
                match integrate_to_infinity(|u: f64| u * self.symmetric_density_sum(u), r, quad_tol()) {
                    Ok(e) if e.value.is_finite() => Ok(Some(e.value)),
                    _ => Ok(None),
                }
            }
        }
    }

    /// `∫_{|x|<1} |x| ν(dx)`; `None` when the process has infinite variation jumps.
    pub fn abs_first_moment_below_one(&self) -> Result<Option<f64>> {
        match self {
            LevyMeasure::Power(cs) => {
                let mut total = 0.0;
                for c in cs {
                    match c.first_moment_below(1.0) {
                        Some(v) => total += v,
                        None => return Ok(None),
                    }
                }
                Ok(Some(total))
            }
            LevyMeasure::Custom(_) => {
                match integrate(|u: f64| u * self.symmetric_density_sum(u), 0.0, 1.0, quad_tol()) {
                    Ok(e) => Ok(Some(e.value)),
                    Err(_) => Ok(None),
                }
            }
        }
    }

    /// Total mass `ν(ℝ)`; `None` when infinite.
    pub fn total_mass(&self) -> Option<f64> {
        match self {
            LevyMeasure::Power(cs) => cs.iter().map(|c| c.total_mass()).sum(),
            LevyMeasure::Custom(m) => {
                let t = (m.upper_tail)(1e-300) + (m.lower_tail)(1e-300);
                t.is_finite().then_some(t)
            }
        }
    }

    /// Closed-form `∫(e^{iξx} - 1 - iξx 1_{(-1,1)}(x)) ν(dx)` where available.
    pub fn truncated_exponent(&self, xi: f64) -> Option<Complex64> {
        match self {
            LevyMeasure::Power(cs) => Some(cs.iter().map(|c| c.truncated_exponent(xi)).sum()),
            LevyMeasure::Custom(_) => None,
        }
    }

    /// The measure of the dual process, `ν̂(A) = ν(-A)`.
    pub fn reflected(&self) -> LevyMeasure {
        match self {
            LevyMeasure::Power(cs) => LevyMeasure::Power(cs.iter().map(|c| c.reflected()).collect()),
            LevyMeasure::Custom(m) => {
                let d = m.density.clone();
                LevyMeasure::Custom(CustomMeasure {
                    label: format!("reflected {}", m.label),
                    density: Arc::new(move |x| d(-x)),
                    upper_tail: m.lower_tail.clone(),
                    lower_tail: m.upper_tail.clone(),
                })
            }
        }
    }

    /// `∫ (1 ∧ x²) ν(dx)`; errors if not finite.
    pub fn check_integrability(&self) -> Result<f64> {
        let v = self.second_moment_below(1.0)? + self.upper_tail(1.0) + self.lower_tail(1.0);
        if !v.is_finite() {
            return Err(LevyError::InvalidParameter(
                "∫(1 ∧ x²) ν(dx) is not finite".into(),
            ));
        }
        Ok(v)
    }

    /// Tail functions must be non-increasing and match the integrated density.
    pub fn check_tail_consistency(&self, points: &[f64], rel_tol: f64) -> Result<()> {
        for side in [Side::Positive, Side::Negative] {
            let mut prev = f64::INFINITY;
            for &r in points {
                let t = self.tail(side, r);
                if t > prev * (1.0 + 1e-12) {
                    return Err(LevyError::InvalidParameter(format!(
                        "{side:?} tail increases at r = {r:e}"
                    )));
                }
                prev = t;
                let s = side.sign();
                let q = integrate_to_infinity(|u: f64| self.density(s * u), r, quad_tol())?.value;
                let scale = t.abs().max(1e-300);
                if (q - t).abs() > rel_tol * scale && (q - t).abs() > 1e-14 {
                    return Err(LevyError::InvalidParameter(format!(
                        "{side:?} tail {t:e} disagrees with integrated density {q:e} at r = {r:e}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn samples() -> Vec<PowerComponent> {
        vec![
            PowerComponent::new(Side::Positive, 0.7, 1.5, 0.0).unwrap(),
            PowerComponent::new(Side::Negative, 0.3, 0.6, 0.0).unwrap(),
            PowerComponent::new(Side::Positive, 1.1, 1.4, 2.5).unwrap(),
            PowerComponent::new(Side::Negative, 0.9, 1.0, 1.5).unwrap(),
            PowerComponent::new(Side::Positive, 2.0, -1.0, 3.0).unwrap(),
            PowerComponent::new(Side::Negative, 0.5, 0.0, 0.8).unwrap(),
            PowerComponent::new(Side::Positive, 0.4, 1.0, 0.0).unwrap(),
        ]
    }

    #[test]
    fn rejects_non_levy_components() {
        assert!(PowerComponent::new(Side::Positive, 1.0, 2.0, 1.0).is_err());
        assert!(PowerComponent::new(Side::Positive, 1.0, -0.5, 0.0).is_err());
        assert!(PowerComponent::new(Side::Positive, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn tails_consistent_with_density() {
        for c in samples() {
            let m = LevyMeasure::Power(vec![c]);
            m.check_tail_consistency(&[1e-3, 0.1, 1.0, 4.0], 1e-6).unwrap();
        }
    }

    #[test]
    fn moments_match_quadrature() {
        let tol = Tolerance::new(1e-14, 1e-12).with_max_intervals(10_000);
        for c in samples() {
            for &r in &[0.01, 0.5, 1.0, 3.0] {
                let q = integrate(|u: f64| u * u * c.density(u), 0.0, r, tol).unwrap().value;
                assert_relative_eq!(c.second_moment_below(r), q, max_relative = 1e-8);
                let q1 = integrate(|u: f64| u * c.density(u), r, 2.0 * r + 1.0, tol).unwrap().value;
                assert_relative_eq!(c.first_moment_between(r, 2.0 * r + 1.0).unwrap(), q1, max_relative = 1e-8);
            }
        }
    }

    /// Direct quadrature of the truncated exponent integrand on one side.
    fn exponent_oracle(c: &PowerComponent, xi: f64) -> Complex64 {
        let s = c.side.sign();
        let tol = Tolerance::new(1e-13, 1e-11).with_max_intervals(20_000);
        let f = |u: f64| {
            let th = s * xi * u;
            let half = (0.5 * th).sin();
            let sin_minus = if th.abs() < 1e-2 {
                -th.powi(3) / 6.0 * (1.0 - th * th / 20.0 + th.powi(4) / 840.0)
            } else {
                th.sin() - th
            };
            Complex64::new(-2.0 * half * half, sin_minus) * c.density(u)
        };
        // u = t^2 tames the u^{1-y} endpoint singularity
        let mut pts: Vec<f64> = (0..=12).map(|k| 10f64.powf(-0.5 * k as f64)).rev().collect();
        pts.insert(0, 0.0);
        let near = crate::quad::integrate_breaks(|t: f64| f(t * t) * (2.0 * t), &pts, tol)
            .unwrap()
            .value;
        let re = crate::quad::integrate_oscillatory_tail(
            |u: f64| ((s * xi * u).cos() - 1.0) * c.density(u) + c.density(u),
            1.0,
            PI / xi.abs(),
            tol,
            4000,
        )
        .unwrap()
        .value
            - c.tail(1.0);
        let im = crate::quad::integrate_oscillatory_tail(
            |u: f64| (s * xi * u).sin() * c.density(u),
            1.0,
            PI / xi.abs(),
            tol,
            4000,
        )
        .unwrap()
        .value;
        near + Complex64::new(re, im)
    }

    #[test]
    fn closed_form_exponent_matches_quadrature() {
        for c in samples() {
            for &xi in &[-7.0, -0.3, 0.05, 1.0, 12.0] {
                let cf = c.truncated_exponent(xi);
                let q = exponent_oracle(&c, xi);
                assert!(
                    (cf - q).norm() <= 1e-7 * cf.norm().max(1e-3),
                    "{c:?} xi={xi}: closed {cf} vs quad {q}"
                );
            }
        }
    }

    #[test]
    fn reflection_swaps_tails() {
        let m = LevyMeasure::Power(samples());
        let r = m.reflected();
        assert_relative_eq!(m.upper_tail(0.4), r.lower_tail(0.4), max_relative = 1e-14);
        assert_relative_eq!(m.density(-0.2), r.density(0.2), max_relative = 1e-14);
    }
}
