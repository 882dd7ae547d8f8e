//! Transition laws by Fourier inversion of `e^{-tψ}`: densities, distribution
//! functions, positivity probabilities, and two exponent-level estimates.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::concentration;
use crate::error::{LevyError, Result};
use crate::interp::Pchip;
use crate::model::{log_grid, ProcessSpec};
use crate::quad::{integrate_breaks, integrate_log_scale, integrate_oscillatory_tail, Tolerance};
use crate::report::{write_table, Band, BoundReport};

const DECAY_CUTOFF: f64 = 40.0;
const MAX_PANELS: usize = 20_000;

fn tol() -> Tolerance {
    Tolerance::new(1e-11, 1e-9).with_max_intervals(8000)
}

/// Frequency `ξ*` with `t |ψ(ξ*)| = 1`, found by bisection in `log ξ`.
pub fn frequency_scale(spec: &ProcessSpec, t: f64) -> f64 {
    let (mut a, mut b) = (-80.0f64, 80.0f64);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if t * spec.psi(m.exp()).norm() < 1.0 {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-10 {
            break;
        }
    }
    (0.5 * (a + b)).exp()
}

/// Integration window `[ξ_lo, ξ_hi]`: below `ξ_lo` the integrand is
/// `O(1e-14)`, above `ξ_hi` the factor `e^{-t Re ψ}` is below `e^{-40}`.
fn window(spec: &ProcessSpec, t: f64) -> Result<(f64, f64, f64)> {
    let star = frequency_scale(spec, t);
    let mut hi = star;
    let mut k = 0;
    while t * spec.re_psi(hi) <= DECAY_CUTOFF {
        hi *= 2.0;
        k += 1;
        if k > 80 {
            return Err(LevyError::NotIntegrable(format!(
                "e^(-t Re psi) does not decay: t Re psi({hi:e}) = {:e} at t = {t:e}",
                t * spec.re_psi(hi)
            )));
        }
    }
    let mut lo = star;
    for _ in 0..200 {
        if t * spec.psi(lo).norm() < 1e-14 {
            break;
        }
        lo *= 0.5;
    }
    Ok((lo, star, hi))
}

fn decade_breaks(lo: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = extra.to_vec();
    let mut x = 10f64.powf(lo.log10().ceil());
    while x < hi {
        v.push(x);
        x *= 10.0;
    }
    v
}

/// `P(X_t > 0) = 1/2 + (1/π) ∫_0^∞ Im(e^{-tψ(ξ)})/ξ dξ`.
pub fn positivity(spec: &ProcessSpec, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(LevyError::InvalidParameter(format!("positivity needs t > 0, got {t}")));
    }
    if spec.is_symmetric() {
        return Ok(0.5);
    }
    let (lo, star, hi) = window(spec, t)?;
    let f = |xi: f64| (-spec.psi(xi) * t).exp().im / xi;
    let est = integrate_log_scale(f, lo, hi, &decade_breaks(lo, hi, &[star]), tol())?;
    Ok((0.5 + est.value / PI).clamp(0.0, 1.0))
}

/// `P(X_t ≤ x)` by Gil–Pelaez inversion.
pub fn cdf(spec: &ProcessSpec, t: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(1.0 - positivity(spec, t)?);
    }
    let (lo, star, hi) = window(spec, t)?;
    let lo = lo.min(1e-14 / x.abs());
    let f = |xi: f64| (Complex64::new(0.0, -xi * x) - spec.psi(xi) * t).exp().im / xi;
    let turn = (1.0 / x.abs()).min(hi);
    let mut total = integrate_log_scale(&f, lo, turn, &decade_breaks(lo, turn, &[star]), tol())?.value;
    if turn < hi {
        total += oscillatory_range(&f, turn, hi, PI / x.abs())?;
    }
    Ok((0.5 - total / PI).clamp(0.0, 1.0))
}

/// `∫_a^b f` with breakpoints every `period` (half-periods of the oscillation).
fn oscillatory_range<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, period: f64) -> Result<f64> {
    let n = ((b - a) / period).ceil() as usize;
    if n > MAX_PANELS {
        return Err(LevyError::Quadrature {
            estimate: f64::NAN,
            achieved: f64::INFINITY,
            requested: tol().abs,
            context: format!("{n} oscillation panels exceed the budget of {MAX_PANELS}"),
        });
    }
    let mut pts: Vec<f64> = (0..n).map(|k| a + k as f64 * period).collect();
    pts.push(b);
    let panel_tol = Tolerance::new(1e-12, 1e-9).with_max_intervals(20 * (n + 10));
    Ok(integrate_breaks(f, &pts, panel_tol)?.value)
}

/// Transition density `(1/2π) ∫ e^{-iξx} e^{-tψ(ξ)} dξ`.
pub fn density(spec: &ProcessSpec, t: f64, x: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(LevyError::InvalidParameter(format!("density needs t > 0, got {t}")));
    }
    let (_, star, hi) = window(spec, t)?;
    let f = |xi: f64| (Complex64::new(0.0, -xi * x) - spec.psi(xi) * t).exp().re;
    let v = if x == 0.0 || hi * x.abs() < PI {
        let mut pts = vec![0.0];
        pts.extend(decade_breaks(star * 1e-6, hi, &[]));
        pts.push(hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        integrate_breaks(f, &pts, tol())?.value
    } else {
        oscillatory_range(&f, 0.0, hi, PI / x.abs())?
    } / PI;
    if v < -1e-8 {
        return Err(LevyError::Quadrature {
            estimate: v,
            achieved: v.abs(),
            requested: 1e-8,
            context: format!("negative density at t = {t:e}, x = {x:e}"),
        });
    }
    Ok(v.max(0.0))
}

/// Positivity probabilities `ρ(t) = P(X_t ≥ 0)` tabulated on a log time
/// grid and interpolated monotonically in `log t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityCurve {
    pub times: Vec<f64>,
    pub rho: Vec<f64>,
    /// `min_t min(ρ(t), 1 - ρ(t))` over the grid.
    pub eta_lower: f64,
    /// Closed-form constant value for strictly stable processes.
    pub constant: Option<f64>,
    #[serde(skip)]
    interp: Option<Pchip>,
}

pub const CURVE_POINTS: usize = 64;
pub const CURVE_RANGE: (f64, f64) = (1e-6, 1e6);

impl PositivityCurve {
    /// Gil–Pelaez evaluation on `CURVE_POINTS` log-spaced times.
    pub fn build(spec: &ProcessSpec) -> Result<Self> {
        Self::build_on(spec, &log_grid(CURVE_RANGE.0, CURVE_RANGE.1, CURVE_POINTS))
    }

    pub fn build_on(spec: &ProcessSpec, times: &[f64]) -> Result<Self> {
        let rho = crate::parallel::try_map(times, |&t| positivity(spec, t))?;
        Ok(Self::from_values(times.to_vec(), rho, None))
    }

    /// The constant curve of a strictly stable process.
    pub fn constant(rho: f64) -> Self {
        let times = log_grid(CURVE_RANGE.0, CURVE_RANGE.1, CURVE_POINTS);
        let vals = vec![rho; times.len()];
        Self::from_values(times, vals, Some(rho))
    }

    fn from_values(times: Vec<f64>, rho: Vec<f64>, constant: Option<f64>) -> Self {
        let eta_lower = rho.iter().map(|r| r.min(1.0 - r)).fold(f64::INFINITY, f64::min);
        let interp = Pchip::new(times.iter().map(|t| t.ln()).collect(), rho.clone());
        PositivityCurve {
            times,
            rho,
            eta_lower,
            constant,
            interp: Some(interp),
        }
    }

    /// `ρ(t)`, constant beyond the grid.
    pub fn eval(&self, t: f64) -> f64 {
        if let Some(c) = self.constant {
            return c;
        }
        match &self.interp {
            Some(p) => p.eval(t.ln()),
            None => Pchip::new(self.times.iter().map(|t| t.ln()).collect(), self.rho.clone()).eval(t.ln()),
        }
    }

    /// Curve of the dual process, `1 - ρ(t)`.
    pub fn dual(&self) -> Self {
        Self::from_values(
            self.times.clone(),
            self.rho.iter().map(|r| 1.0 - r).collect(),
            self.constant.map(|c| 1.0 - c),
        )
    }

    /// CSV with columns `t,rho`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows: Vec<Vec<f64>> = self.times.iter().zip(&self.rho).map(|(t, r)| vec![*t, *r]).collect();
        write_table(path, &["t", "rho"], &rows)
    }
}

/// CSV with columns `xi,re_psi,im_psi`.
pub fn write_exponent_csv(spec: &ProcessSpec, grid: &[f64], path: &Path) -> Result<()> {
    let rows: Vec<Vec<f64>> = grid
        .iter()
        .map(|&xi| {
            let p = spec.psi(xi);
            vec![xi, p.re, p.im]
        })
        .collect();
    write_table(path, &["xi", "re_psi", "im_psi"], &rows)
}

/// `|Im ψ(ξ)| / Re ψ(ξ)` over `±grid`; restricted to `|ξ| ≥ 1` unless the
/// process has zero mean. The maximum is recorded as note `C`.
pub fn im_re_domination(spec: &ProcessSpec, grid: &[f64]) -> BoundReport {
    let all = spec.is_zero_mean(1e-8);
    let mut rep = BoundReport::new("im-re", &["xi"], Band::Finite);
    for &g in grid {
        for xi in [g.abs(), -g.abs()] {
            if !all && xi.abs() < 1.0 {
                continue;
            }
            let p = spec.psi(xi);
            rep.push(&[xi], p.im.abs(), p.re);
        }
    }
    let mut rep = rep.finish();
    rep.note("C", rep.max_ratio);
    rep.note("all_xi", if all { 1.0 } else { 0.0 });
    rep
}

/// `∫_ℝ (1 - cos(xy)) Re(1/ψ(y)) dy`.
pub fn ex3_integral(spec: &ProcessSpec, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(LevyError::InvalidParameter("ex3 integral needs x ≠ 0".into()));
    }
    let ax = x.abs();
    let re_inv = |y: f64| {
        let p = spec.psi(y);
        p.re / p.norm_sqr()
    };
    // local exponent of Re(1/ψ) near zero must keep y^2 Re(1/ψ) integrable
    let (y1, y2) = (1e-8 / ax, 1e-7 / ax);
    let slope = (re_inv(y2) / re_inv(y1)).ln() / 10f64.ln();
    if slope <= -3.0 + 1e-3 {
        return Err(LevyError::NotIntegrable(format!(
            "Re(1/psi) grows like y^{slope:.3} at 0; (1-cos) does not compensate"
        )));
    }
    let a = PI / (2.0 * ax);
    // [0, a]: y = a t^4 smooths the algebraic behaviour at the origin
    let near = integrate_breaks(
        |t: f64| {
            let y = a * t.powi(4);
            if y == 0.0 {
                return 0.0;
            }
            let one_minus_cos = 2.0 * (0.5 * x * y).sin().powi(2);
            one_minus_cos * re_inv(y) * 4.0 * a * t.powi(3)
        },
        &[0.0, 0.25, 0.5, 1.0],
        Tolerance::new(1e-13, 1e-10).with_max_intervals(8000),
    )?
    .value;
    // [a, ∞): non-oscillatory part plus an alternating cosine tail
    let top = a * 1e10;
    let body = integrate_log_scale(re_inv, a, top, &decade_breaks(a, top, &[]), Tolerance::new(1e-14, 1e-10))?.value;
    let decay = -(re_inv(top) / re_inv(top / 2.0)).ln() / 2f64.ln();
    if decay <= 1.0 {
        return Err(LevyError::NotIntegrable(format!(
            "Re(1/psi) decays like y^-{decay:.3}, not integrable at infinity"
        )));
    }
    let far = re_inv(top) * top / (decay - 1.0);
    let osc = integrate_oscillatory_tail(
        |y: f64| (x * y).cos() * re_inv(y),
        a,
        PI / ax,
        Tolerance::new(1e-13, 1e-10),
        MAX_PANELS,
    )?
    .value;
    Ok(2.0 * (near + body + far - osc))
}

/// Ratio of the ex3 integral to `1/(|x| h(|x|))` over `xs`.
pub fn ex3_report(spec: &ProcessSpec, xs: &[f64], band: Band) -> Result<BoundReport> {
    let vals = crate::parallel::try_map(xs, |&x| {
        Ok((ex3_integral(spec, x)?, 1.0 / (x.abs() * concentration::h(spec, x.abs())?)))
    })?;
    let mut rep = BoundReport::new("ex3", &["x"], band);
    for (x, (l, r)) in xs.iter().zip(vals) {
        rep.push(&[*x], l, r);
    }
    Ok(rep.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Family;
    use crate::special::gamma_fn;
    use approx::assert_relative_eq;
    use statrs::function::erf::erf;

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
    fn brownian_density_is_gaussian_variance_two_t() {
        let b = ProcessSpec::new(Family::brownian()).unwrap();
        for &t in &[0.3, 1.0] {
            for &x in &[0.0f64, 0.4, -1.7, 3.0] {
                let want = (-x * x / (4.0 * t)).exp() / (4.0 * PI * t).sqrt();
                assert_relative_eq!(density(&b, t, x).unwrap(), want, max_relative = 1e-7, epsilon = 1e-12);
            }
        }
        assert_relative_eq!(cdf(&b, 2.0, 1.0).unwrap(), 0.5 * (1.0 + erf(1.0 / 8f64.sqrt())), max_relative = 1e-8);
    }

    #[test]
    fn symmetric_stable_density_at_origin() {
        // f(0) = Γ(1 + 1/α)/π for ψ = |ξ|^α
        let s = stable(1.5, 0.0);
        assert_relative_eq!(density(&s, 1.0, 0.0).unwrap(), gamma_fn(1.0 + 1.0 / 1.5) / PI, max_relative = 1e-8);
    }

    #[test]
    fn density_normalised_and_consistent_with_cdf() {
        let s = cgmy_skew();
        let t = 0.7;
        let pts = log_grid(1e-3, 40.0, 60);
        let mut all = vec![0.0];
        for &p in &pts {
            all.push(p);
            all.push(-p);
        }
        all.sort_by(f64::total_cmp);
        let mass = integrate_breaks(|x: f64| density(&s, t, x).unwrap(), &all, Tolerance::new(1e-10, 1e-8))
            .unwrap()
            .value;
        let tails = cdf(&s, t, -40.0).unwrap() + 1.0 - cdf(&s, t, 40.0).unwrap();
        assert!((mass + tails - 1.0).abs() < 1e-6, "mass {mass} tails {tails}");
        for &(a, b) in &[(-1.0, 0.0), (0.0, 0.5), (-0.2, 2.0), (0.3, 0.9), (-3.0, -1.0)] {
            let q = integrate_breaks(|x: f64| density(&s, t, x).unwrap(), &[a, b], Tolerance::new(1e-12, 1e-9))
                .unwrap()
                .value;
            let d = cdf(&s, t, b).unwrap() - cdf(&s, t, a).unwrap();
            assert!((q - d).abs() < 1e-5, "[{a},{b}]: {q} vs {d}");
        }
    }

    #[test]
    fn positivity_of_stable_is_closed_form() {
        for &(a, b) in &[(1.5, 1.0), (1.5, 0.5), (1.8, -0.3), (0.8, 0.6)] {
            let s = stable(a, b);
            let want = s.stable_positivity().unwrap();
            for &t in &[1e-3, 1.0, 50.0] {
                assert_relative_eq!(positivity(&s, t).unwrap(), want, max_relative = 1e-7);
            }
        }
        assert_relative_eq!(stable(1.5, 1.0).stable_positivity().unwrap(), 1.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn positivity_and_dual_sum_to_one() {
        let s = cgmy_skew();
        for &t in &[1e-3, 0.1, 10.0] {
            let p = positivity(&s, t).unwrap();
            let q = positivity(&s.dual(), t).unwrap();
            assert!((p + q - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn curve_bounds_and_duality() {
        let s = cgmy_skew();
        let c = PositivityCurve::build_on(&s, &log_grid(1e-3, 1e3, 13)).unwrap();
        assert!(c.eta_lower > 0.05 && c.eta_lower < 0.5);
        assert!(c.rho.iter().all(|r| (0.0..=1.0).contains(r)));
        let d = c.dual();
        for &t in &[2e-3, 0.5, 77.0] {
            assert!((c.eval(t) + d.eval(t) - 1.0).abs() < 1e-12);
        }
        let sym = PositivityCurve::build_on(&stable(1.5, 0.0), &log_grid(1e-3, 1e3, 5)).unwrap();
        assert!(sym.rho.iter().all(|r| (r - 0.5).abs() < 1e-6));
    }

    #[test]
    fn im_re_ratio_for_stable_is_skew_constant() {
        let s = stable(1.8, 0.5);
        let rep = im_re_domination(&s, &log_grid(1e-4, 1e4, 17));
        let want = (0.5 * (0.9 * PI).tan()).abs();
        assert_relative_eq!(rep.min_ratio, want, max_relative = 1e-9);
        assert_relative_eq!(rep.max_ratio, want, max_relative = 1e-9);
        let sym = im_re_domination(&stable(1.5, 0.0), &log_grid(1e-4, 1e4, 9));
        assert!(sym.max_ratio < 1e-12);
        let cg = im_re_domination(&cgmy_skew(), &log_grid(1e-4, 1e4, 33));
        assert!(cg.passed() && cg.note_value("all_xi") == Some(1.0));
    }

    #[test]
    fn resolvent_real_part_comparable() {
        let s = cgmy_skew();
        let c = im_re_domination(&s, &log_grid(1e-4, 1e4, 33)).max_ratio;
        for &y in &log_grid(1e-3, 1e3, 13) {
            for &lam in &[1e-3, 1.0, 100.0] {
                let p = s.psi(y);
                let ratio = (1.0 / (p + lam)).re * (p.re + lam);
                assert!(ratio <= 1.0 + 1e-12 && ratio >= 1.0 / (1.0 + c * c) - 1e-12);
            }
        }
    }

    #[test]
    fn ex3_brownian_ratio_is_pi() {
        let b = ProcessSpec::new(Family::brownian()).unwrap();
        for &x in &[0.01, 1.0, 30.0] {
            assert_relative_eq!(ex3_integral(&b, x).unwrap(), PI * x, max_relative = 1e-6);
        }
    }

    #[test]
    fn ex3_stable_ratio_independent_of_x() {
        let s = stable(1.5, 0.0);
        let rep = ex3_report(&s, &[0.01, 0.3, 1.0, 7.0, 100.0], Band::Spread { factor: 50.0 }).unwrap();
        assert!(rep.spread() - 1.0 < 1e-5, "{:?}", rep.rows);
        let cg = ex3_report(&cgmy_skew(), &log_grid(1e-2, 1e2, 9), Band::Spread { factor: 50.0 }).unwrap();
        assert!(cg.passed());
    }

    #[test]
    fn ex3_rejects_slow_exponent() {
        // α < 1: Re(1/ψ) not integrable at infinity
        assert!(ex3_integral(&stable(0.8, 0.0), 1.0).is_err());
    }
}
