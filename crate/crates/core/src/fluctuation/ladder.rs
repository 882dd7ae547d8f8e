//! Ladder exponents `κ(z, 0)` and `κ(0, λ)` of a process and its dual,
//! normalised by `κ(1, 0) = 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{LevyError, Result};
use crate::model::ProcessSpec;
use crate::quad::{integrate_log_scale, Tolerance};
use crate::spectral::{frequency_scale, positivity, PositivityCurve};

fn tight() -> Tolerance {
    Tolerance::new(1e-13, 1e-12).with_max_intervals(6000)
}

fn anchor_tol() -> Tolerance {
    Tolerance::new(1e-12, 1e-12).with_max_intervals(6000)
}

fn decades(lo: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
    let mut v = extra.to_vec();
    let mut x = 10f64.powf(lo.log10().ceil());
    while x < hi {
        v.push(x);
        x *= 10.0;
    }
    v
}

/// `log κ(0,1) + log κ̂(0,1)` and `log κ(0,1) - log κ̂(0,1)`:
///
/// `a + â = (2/π) ∫_0^∞ log|ψ(ξ)| / (1 + ξ²) dξ`,
/// `a - â = (2/π) ∫_0^∞ [ξ arg ψ(ξ) / (1 + ξ²) - arg(1 + ψ(ξ)) / ξ] dξ`.
fn anchor_sum_diff(spec: &ProcessSpec) -> Result<(f64, f64)> {
    let (lo, hi) = (1e-16, 1e16);
    let br = decades(lo, hi, &[]);
    let sum = integrate_log_scale(
        |xi: f64| spec.psi(xi).norm().ln() / (1.0 + xi * xi),
        lo,
        hi,
        &br,
        anchor_tol(),
    )?
    .value;
    let diff = integrate_log_scale(
        |xi: f64| {
            let p = spec.psi(xi);
            xi * p.arg() / (1.0 + xi * xi) - (p + 1.0).arg() / xi
        },
        lo,
        hi,
        &br,
        anchor_tol(),
    )?
    .value;
    Ok((2.0 / PI * sum, 2.0 / PI * diff))
}

/// `log κ(0,λ) - log κ(0,1) = (1/π) ∫_0^∞ Re[log ψ(ξ) (1/(λ+iξ) - 1/(1+iξ))] dξ`.
fn log_kappa_space_shift(spec: &ProcessSpec, lam: f64) -> Result<f64> {
    if lam == 1.0 {
        return Ok(0.0);
    }
    let lo = 1e-16 * lam.min(1.0);
    let hi = 1e16 * lam.max(1.0);
    let v = integrate_log_scale(
        |xi: f64| {
            let l = spec.psi(xi).ln();
            let k = 1.0 / Complex64::new(lam, xi) - 1.0 / Complex64::new(1.0, xi);
            (l * k).re
        },
        lo,
        hi,
        &decades(lo, hi, &[lam]),
        tight(),
    )?
    .value;
    Ok(v / PI)
}

/// Ladder exponents of one process.
#[derive(Clone, Debug)]
pub struct LadderExponent {
    spec: ProcessSpec,
    curve: PositivityCurve,
    /// `log κ(0, 1)`.
    anchor: f64,
    /// `log κ̂(0, 1)`, kept so that `dual()` needs no recomputation.
    dual_anchor: f64,
    dual_curve: PositivityCurve,
    pub is_dual: bool,
}

impl LadderExponent {
    /// Builds the positivity caches of the process and of its dual (each by
    /// its own inversion) and the normalising constants. Strictly stable
    /// processes use their closed-form positivity parameter.
    pub fn new(spec: &ProcessSpec) -> Result<Self> {
        let (curve, dual_curve) = match spec.stable_positivity() {
            Some(rho) => (PositivityCurve::constant(rho), PositivityCurve::constant(1.0 - rho)),
            None => (PositivityCurve::build(spec)?, PositivityCurve::build(&spec.dual())?),
        };
        Self::with_curves(spec, curve, dual_curve)
    }

    /// As [`LadderExponent::new`] but always inverting for `ρ(t)`.
    pub fn general(spec: &ProcessSpec) -> Result<Self> {
        let curve = PositivityCurve::build(spec)?;
        let dual_curve = PositivityCurve::build(&spec.dual())?;
        Self::with_curves(spec, curve, dual_curve)
    }

    fn with_curves(spec: &ProcessSpec, curve: PositivityCurve, dual_curve: PositivityCurve) -> Result<Self> {
        let (sum, diff) = anchor_sum_diff(spec)?;
        Ok(LadderExponent {
            spec: spec.clone(),
            curve,
            dual_curve,
            anchor: 0.5 * (sum + diff),
            dual_anchor: 0.5 * (sum - diff),
            is_dual: false,
        })
    }

    /// Exponents of the dual process `-X`.
    pub fn dual(&self) -> LadderExponent {
        LadderExponent {
            spec: self.spec.dual(),
            curve: self.dual_curve.clone(),
            dual_curve: self.curve.clone(),
            anchor: self.dual_anchor,
            dual_anchor: self.anchor,
            is_dual: !self.is_dual,
        }
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    pub fn positivity_curve(&self) -> &PositivityCurve {
        &self.curve
    }

    /// `κ(0, 1)`.
    pub fn space_constant(&self) -> f64 {
        self.anchor.exp()
    }

    /// `κ(z, 0) = exp(∫_0^∞ (e^{-s} - e^{-zs}) s^{-1} ρ(s) ds)` with the cached `ρ`.
    pub fn kappa_time(&self, z: f64) -> Result<f64> {
        if !(z > 0.0) {
            return Err(LevyError::InvalidParameter(format!("kappa_time needs z > 0, got {z}")));
        }
        if z == 1.0 {
            return Ok(1.0);
        }
        if let Some(rho) = self.curve.constant {
            return Ok(z.powf(rho));
        }
        Ok(self.log_kappa_time_quadrature(z)?.exp())
    }

    /// The cached-`ρ` quadrature even when a closed form exists.
    pub fn log_kappa_time_quadrature(&self, z: f64) -> Result<f64> {
        let lo = 1e-16 / z.max(1.0);
        let hi = 60.0 / z.min(1.0);
        let mut br: Vec<f64> = self.curve.times.clone();
        br.push(1.0);
        br.push(1.0 / z);
        let est = integrate_log_scale(
            |s: f64| ((-s).exp_m1() - (-z * s).exp_m1()) / s * self.curve.eval(s),
            lo,
            hi,
            &br,
            tight(),
        )?;
        Ok(est.value)
    }

    /// `κ(z, 0)` from `log κ(z,0) = ½ log z + (1/π) ∫_0^∞ [arg(z+ψ) - arg(1+ψ)] / ξ dξ`,
    /// an evaluation independent of the positivity cache.
    pub fn kappa_time_fourier(&self, z: f64) -> Result<f64> {
        let lo = 1e-16;
        let hi = 1e16;
        let v = integrate_log_scale(
            |xi: f64| {
                let p = self.spec.psi(xi);
                ((p + z).arg() - (p + 1.0).arg()) / xi
            },
            lo,
            hi,
            &decades(lo, hi, &[frequency_scale(&self.spec, 1.0 / z)]),
            tight(),
        )?
        .value;
        Ok((0.5 * z.ln() + v / PI).exp())
    }

    /// `κ(0, λ)` by the Fourier representation of `log κ(0, ·)`.
    pub fn kappa_space(&self, lam: f64) -> Result<f64> {
        if !(lam > 0.0) {
            return Err(LevyError::InvalidParameter(format!("kappa_space needs λ > 0, got {lam}")));
        }
        Ok((self.anchor + log_kappa_space_shift(&self.spec, lam)?).exp())
    }

    /// `κ(0, λ) = exp(∫_0^∞ s^{-1} [e^{-s} P(X_s ≥ 0) - E(e^{-λ X_s}; X_s ≥ 0)] ds)`,
    /// with the inner expectation by Parseval. Slow; used as a cross-check.
    pub fn kappa_space_direct(&self, lam: f64) -> Result<f64> {
        let spec = &self.spec;
        let integrand = |s: f64| -> f64 {
            match space_integrand(spec, s, lam) {
                Ok(v) => v,
                Err(_) => f64::NAN,
            }
        };
        let (lo, hi) = (1e-18, 1e10);
        let body = integrate_log_scale(
            |s: f64| integrand(s) / s,
            lo,
            hi,
            &decades(lo, hi, &[]),
            Tolerance::new(1e-10, 1e-8).with_max_intervals(4000),
        )?
        .value;
        // integrand ~ c s^{-p} beyond `hi`
        let (f1, f2) = (integrand(hi / 4.0), integrand(hi));
        let p = -(f2 / f1).ln() / 4f64.ln();
        let tail = if p > 0.0 && f2.is_finite() { f2 / p } else { 0.0 };
        Ok((body + tail).exp())
    }
}

/// `E[(1 - e^{-λX_s}); X_s > 0] - (1 - e^{-s}) P(X_s > 0)`.
fn space_integrand(spec: &ProcessSpec, s: f64, lam: f64) -> Result<f64> {
    let star = frequency_scale(spec, s);
    let mut hi = star;
    while s * spec.re_psi(hi) <= 40.0 {
        hi *= 2.0;
        if hi > star * 1e20 {
            return Err(LevyError::NotIntegrable("e^{-s Re psi} does not decay".into()));
        }
    }
    let mut lo = star.min(lam);
    while s * spec.psi(lo).norm() > 1e-15 || lo > lam * 1e-14 {
        lo *= 0.5;
        if lo < 1e-300 {
            break;
        }
    }
    let f = |xi: f64| {
        let phi = (-spec.psi(xi) * s).exp();
        phi.im / xi + ((1.0 - phi) / Complex64::new(lam, xi)).re
    };
    let body = integrate_log_scale(f, lo, hi, &decades(lo, hi, &[star, lam]), Tolerance::new(1e-12, 1e-10))?.value;
    // beyond `hi` the integrand is λ/(λ²+ξ²)
    let tail = 0.5 * PI - (hi / lam).atan();
    let d = (body + tail) / PI;
    let rho = positivity(spec, s)?;
    Ok(d + (-s).exp_m1() * rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{log_grid, Family};
    use approx::assert_relative_eq;

    fn stable(alpha: f64, beta: f64) -> ProcessSpec {
        ProcessSpec::new(Family::Stable { alpha, beta, scale: 1.0 }).unwrap()
    }

    fn cgmy_skew() -> ProcessSpec {
        ProcessSpec::new(Family::Cgmy {
            c_pos: 1.0,
            c_neg: 0.4,
            g: 1.5,
            m: 5.0,
            y_pos: 1.4,
            y_neg: 1.4,
            mean: 0.0,
        })
        .unwrap()
    }

    #[test]
    fn symmetric_stable_space_exponent_is_power() {
        let l = LadderExponent::new(&stable(1.5, 0.0)).unwrap();
        assert!(l.anchor.abs() < 1e-10);
        for &lam in &[1e-4, 0.3, 7.0, 1e5] {
            assert_relative_eq!(l.kappa_space(lam).unwrap(), lam.powf(0.75), max_relative = 1e-9);
        }
    }

    #[test]
    fn brownian_space_exponent_is_linear() {
        let l = LadderExponent::new(&ProcessSpec::new(Family::brownian()).unwrap()).unwrap();
        for &lam in &[1e-3, 1.0, 40.0] {
            assert_relative_eq!(l.kappa_space(lam).unwrap(), lam, max_relative = 1e-9);
        }
        assert_relative_eq!(l.kappa_time(9.0).unwrap(), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn skewed_stable_product_of_constants() {
        // κ(0,1) κ̂(0,1) = |ψ(1)| for strictly stable laws
        let s = stable(1.5, 0.5);
        let l = LadderExponent::new(&s).unwrap();
        let prod = l.space_constant() * l.dual().space_constant();
        assert_relative_eq!(prod, s.psi(1.0).norm(), max_relative = 1e-9);
        let rho = s.stable_positivity().unwrap();
        let ratio = l.kappa_space(50.0).unwrap() / l.kappa_space(0.02).unwrap();
        assert_relative_eq!(ratio, 2500f64.powf(1.5 * rho), max_relative = 1e-8);
    }

    #[test]
    fn time_exponent_routes_agree() {
        for s in [stable(1.5, 0.5), stable(1.8, -0.7), cgmy_skew()] {
            let l = LadderExponent::general(&s).unwrap();
            for &z in &[1e-2, 0.5, 1e2] {
                let cached = l.log_kappa_time_quadrature(z).unwrap().exp();
                let fourier = l.kappa_time_fourier(z).unwrap();
                assert_relative_eq!(cached, fourier, max_relative = 2e-5);
                if let Some(rho) = s.stable_positivity() {
                    assert_relative_eq!(fourier, z.powf(rho), max_relative = 1e-8);
                }
            }
        }
    }

    #[test]
    fn wiener_hopf_identity_in_time() {
        for s in [cgmy_skew(), stable(1.5, 0.5)] {
            let l = LadderExponent::new(&s).unwrap();
            let d = l.dual();
            for &z in &log_grid(1e-3, 1e3, 7) {
                let p = l.kappa_time(z).unwrap() * d.kappa_time(z).unwrap() / z;
                assert!((p - 1.0).abs() < 1e-4, "{}: z={z} product {p}", s.label);
            }
        }
    }

    #[test]
    fn space_routes_agree() {
        for s in [stable(1.5, 0.5), cgmy_skew()] {
            let l = LadderExponent::new(&s).unwrap();
            for &lam in &[0.1, 1.0, 10.0] {
                let f = l.kappa_space(lam).unwrap();
                let d = l.kappa_space_direct(lam).unwrap();
                assert_relative_eq!(f, d, max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn exponents_are_monotone() {
        let l = LadderExponent::new(&cgmy_skew()).unwrap();
        let g = log_grid(1e-3, 1e3, 13);
        let ks: Vec<f64> = g.iter().map(|&x| l.kappa_space(x).unwrap()).collect();
        let kt: Vec<f64> = g.iter().map(|&x| l.kappa_time(x).unwrap()).collect();
        assert!(ks.windows(2).all(|w| w[1] > w[0]));
        assert!(kt.windows(2).all(|w| w[1] > w[0]));
    }
}
