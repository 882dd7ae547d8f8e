//! Adaptive Gauss–Kronrod quadrature (G10/K21) with support for
//! semi-infinite ranges and slowly decaying oscillatory tails.
//!
//! The integrators are generic over [`QuadValue`], so the same code
//! integrates real and complex integrands.

use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{LevyError, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Values that can be integrated: real or complex scalars.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn norm(self) -> f64;
    fn is_finite_value(self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(self) -> f64 {
        self.abs()
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(self) -> f64 {
        Complex64::norm(self)
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            max_intervals: 2000,
        }
    }

    pub const fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    /// The Lévy-measure default: 1e-9 absolute, 1e-7 relative.
    fn default() -> Self {
        Tolerance::new(1e-9, 1e-7)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = T::zero();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k = res_k + (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            res_g = res_g + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = (fc - mean).norm() * WGK[10];
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    res_asc *= half.abs();
    let value = res_k * half;
    let mut err = ((res_k - res_g) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * value.norm();
    (value, err.max(floor))
}

/// Globally adaptive integration of `f` over the finite interval `[a, b]`.
pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<Estimate<T>> {
    integrate_breaks(f, &[a, b], tol)
}

/// Adaptive integration over `[p0, pn]` with the given interior breakpoints.
pub fn integrate_breaks<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    points: &[f64],
    tol: Tolerance,
) -> Result<Estimate<T>> {
    assert!(points.len() >= 2);
    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut total_err = 0.0;
    let mut evals = 0;
    for w in points.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let (v, e) = kronrod21(&f, w[0], w[1]);
        evals += 21;
        total = total + v;
        total_err += e;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    while total_err > tol.target(total.norm()) {
        if heap.len() >= tol.max_intervals {
            return Err(LevyError::Quadrature {
                estimate: total.norm(),
                achieved: total_err,
                requested: tol.target(total.norm()),
                context: format!("interval [{:e}, {:e}]", points[0], points[points.len() - 1]),
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in floating point
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod21(&f, worst.a, mid);
        let (v2, e2) = kronrod21(&f, mid, worst.b);
        evals += 42;
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.error + e1 + e2;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // re-sum to shed the drift accumulated by incremental updates
    let mut value = T::zero();
    let mut err = 0.0;
    for s in heap.iter() {
        value = value + s.value;
        err += s.error;
    }
    if !value.is_finite_value() {
        return Err(LevyError::Quadrature {
            estimate: f64::NAN,
            achieved: f64::INFINITY,
            requested: tol.abs,
            context: "non-finite integrand".into(),
        });
    }
    Ok(Estimate {
        value,
        error: err,
        evaluations: evals,
    })
}

/// Integral over `[a, ∞)` via the map `x = a + t / (1 - t)`.
pub fn integrate_to_infinity<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    tol: Tolerance,
) -> Result<Estimate<T>> {
    let g = |t: f64| {
        if t >= 1.0 {
            return T::zero();
        }
        let one_minus = 1.0 - t;
        let x = a + t / one_minus;
        let v = f(x);
        if v.is_finite_value() {
            v * (1.0 / (one_minus * one_minus))
        } else {
            T::zero()
        }
    };
    integrate(g, 0.0, 1.0, tol)
}

/// Integral over the whole real line on a logarithmic substitution
/// `x = exp(u)`, covering `(0, ∞)` for integrands with algebraic or
/// logarithmic behaviour at both ends. `breaks` are points of `(0, ∞)`
/// where the integrand changes scale.
pub fn integrate_log_scale<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<Estimate<T>> {
    let mut pts: Vec<f64> = vec![lo.ln(), hi.ln()];
    for &b in breaks {
        let u = b.ln();
        if u > pts[0] && u < pts[1] {
            pts.push(u);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    integrate_breaks(
        |u: f64| {
            let x = u.exp();
            f(x) * x
        },
        &pts,
        tol,
    )
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums; returns
/// the most recent extrapolated limit and an error estimate.
pub fn wynn_epsilon(partial_sums: &[f64]) -> (f64, f64) {
    let n = partial_sums.len();
    if n < 3 {
        let last = *partial_sums.last().unwrap_or(&0.0);
        let prev = if n >= 2 { partial_sums[n - 2] } else { 0.0 };
        return (last, (last - prev).abs());
    }
    // table[k] holds column k of the epsilon table for the current diagonal
    let mut e: Vec<Vec<f64>> = vec![partial_sums.to_vec()];
    let mut prev_col: Vec<f64> = vec![0.0; n + 1];
    let mut best = partial_sums[n - 1];
    let mut best_err = (partial_sums[n - 1] - partial_sums[n - 2]).abs();
    let mut k = 0;
    loop {
        let cur = &e[k];
        if cur.len() < 2 {
            break;
        }
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            let base = if k == 0 { 0.0 } else { prev_col[i + 1] };
            if d.abs() < 1e-300 {
                next.push(f64::INFINITY);
            } else {
                next.push(base + 1.0 / d);
            }
        }
        prev_col = cur.clone();
        k += 1;
        // even columns carry estimates of the limit
        if k % 2 == 0 && next.len() >= 2 {
            let m = next.len();
            let cand = next[m - 1];
            let err = (next[m - 1] - next[m - 2]).abs();
            if cand.is_finite() && err < best_err {
                best = cand;
                best_err = err;
            }
        }
        e.push(next);
    }
    (best, best_err)
}

/// Integrates a slowly decaying, sign-alternating tail `∫_a^∞ f` by summing
/// panels of length `panel` (chosen by the caller to span the half-period
/// of the oscillating factor) and accelerating the partial sums.
pub fn integrate_oscillatory_tail<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    panel: f64,
    tol: Tolerance,
    max_panels: usize,
) -> Result<Estimate<f64>> {
    let mut sums = Vec::with_capacity(max_panels);
    let mut s = 0.0;
    let mut evals = 0;
    let mut last: Option<f64> = None;
    let panel_tol = Tolerance {
        abs: tol.abs * 0.1,
        ..tol
    };
    for k in 0..max_panels {
        let lo = a + k as f64 * panel;
        let est = integrate(&f, lo, lo + panel, panel_tol)?;
        evals += est.evaluations;
        s += est.value;
        sums.push(s);
        if est.value.abs() < 1e-300 && k > 2 {
            return Ok(Estimate {
                value: s,
                error: 0.0,
                evaluations: evals,
            });
        }
        if sums.len() >= 6 {
            let window = &sums[sums.len().saturating_sub(24)..];
            let (lim, err) = wynn_epsilon(window);
            let tgt = tol.target(lim);
            if let Some(prev) = last {
                if err < tgt && (lim - prev).abs() < tgt {
                    return Ok(Estimate {
                        value: lim,
                        error: err.max((lim - prev).abs()),
                        evaluations: evals,
                    });
                }
            }
            last = Some(lim);
        }
    }
    let (lim, err) = wynn_epsilon(&sums[sums.len().saturating_sub(24)..]);
    Err(LevyError::Quadrature {
        estimate: lim,
        achieved: err,
        requested: tol.target(lim),
        context: format!("oscillatory tail from {a:e}: partial sum {s:e} after {max_panels} panels"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, Tolerance::default()).unwrap();
        assert_relative_eq!(r.value, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, Tolerance::new(1e-12, 1e-12)).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-10);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_to_infinity(|x: f64| (-x).exp(), 0.0, Tolerance::new(1e-13, 1e-13)).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn log_scale_covers_half_line() {
        // ∫_0^∞ ln(x) / (1 + x²) dx = 0
        let r = integrate_log_scale(
            |x: f64| x.ln() / (1.0 + x * x),
            1e-30,
            1e30,
            &[1.0],
            Tolerance::new(1e-13, 1e-13),
        )
        .unwrap();
        assert!(r.value.abs() < 1e-11, "{}", r.value);
    }

    #[test]
    fn complex_integrand() {
        let r = integrate(
            |x: f64| Complex64::new(0.0, x).exp(),
            0.0,
            std::f64::consts::PI,
            Tolerance::new(1e-13, 1e-13),
        )
        .unwrap();
        assert_relative_eq!(r.value.re, 0.0, epsilon = 1e-12);
        assert_relative_eq!(r.value.im, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // ln 2 = 1 - 1/2 + 1/3 - ...
        let mut s = 0.0;
        let sums: Vec<f64> = (1..=20)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                s
            })
            .collect();
        let (lim, _) = wynn_epsilon(&sums);
        assert_relative_eq!(lim, 2f64.ln(), max_relative = 1e-10);
    }

    #[test]
    fn oscillatory_dirichlet_tail() {
        // ∫_0^∞ sin(x)/x dx = π/2
        let f = |x: f64| if x == 0.0 { 1.0 } else { x.sin() / x };
        let r = integrate_oscillatory_tail(f, 0.0, std::f64::consts::PI, Tolerance::new(1e-11, 1e-11), 200)
            .unwrap();
        assert_relative_eq!(r.value, std::f64::consts::FRAC_PI_2, max_relative = 1e-9);
    }

    #[test]
    fn reports_non_convergence() {
        let tol = Tolerance::new(1e-15, 1e-15).with_max_intervals(4);
        let e = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, tol).unwrap_err();
        assert!(matches!(e, LevyError::Quadrature { .. }));
    }
}
