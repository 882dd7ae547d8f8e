//! Special functions: incomplete gamma for any real order, the exponential
//! integral, and cancellation-free compensated complex powers.

use num_complex::Complex64;
use statrs::function::gamma::{gamma, gamma_lr, gamma_ur};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral `E1(x) = ∫_x^∞ e^{-t}/t dt`, `x > 0`.
pub fn exp_integral_e1(x: f64) -> f64 {
    assert!(x > 0.0);
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - x.ln() + sum
    } else {
        upper_gamma_cf(0.0, x)
    }
}

/// Continued fraction for `Γ(a, x)`, valid for `x > max(a - 1, 0)` and any real `a`.
fn upper_gamma_cf(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x + a * x.ln()).exp() * h
}

/// Upper incomplete gamma `Γ(a, x) = ∫_x^∞ t^{a-1} e^{-t} dt` for any real `a`, `x > 0`.
pub fn upper_gamma(a: f64, x: f64) -> f64 {
    assert!(x > 0.0, "upper_gamma requires x > 0");
    if x >= 2.0 && x >= a + 1.0 {
        return upper_gamma_cf(a, x);
    }
    if a > 0.0 {
        return gamma_ur(a, x) * gamma(a);
    }
    let rounded = a.round();
    if (a - rounded).abs() < 1e-12 && rounded == 0.0 {
        return exp_integral_e1(x);
    }
    // Γ(a, x) = (Γ(a + 1, x) - x^a e^{-x}) / a
    let up = upper_gamma(a + 1.0, x);
    (up - x.powf(a) * (-x).exp()) / a
}

/// Lower incomplete gamma `γ(a, x) = ∫_0^x t^{a-1} e^{-t} dt`, `a > 0`.
pub fn lower_gamma(a: f64, x: f64) -> f64 {
    assert!(a > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x < 1e-3 {
        // series, avoids loss of relative accuracy for tiny x
        let mut sum = 0.0;
        let mut term = x.powf(a) / a;
        for k in 0..60 {
            sum += term;
            term *= -x * (a + k as f64) / ((k + 1) as f64 * (a + k as f64 + 1.0));
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        return sum;
    }
    gamma_lr(a, x) * gamma(a)
}

/// `Γ(a)` for any non-integer-or-positive real `a`.
pub fn gamma_fn(a: f64) -> f64 {
    gamma(a)
}

const SERIES_RADIUS: f64 = 0.25;

/// `(1 + w)^y - 1 - y w`, accurate for small `|w|`.
pub fn compensated_pow(y: f64, w: Complex64) -> Complex64 {
    if w.norm() < SERIES_RADIUS {
        let mut coef = y * (y - 1.0) / 2.0;
        let mut wk = w * w;
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 2..200 {
            let term = wk * coef;
            sum += term;
            if term.norm() <= 1e-18 * sum.norm() || coef == 0.0 {
                break;
            }
            coef *= (y - k as f64) / (k as f64 + 1.0);
            wk *= w;
        }
        sum
    } else {
        (Complex64::new(1.0, 0.0) + w).powf(y) - 1.0 - w * y
    }
}

/// `ln(1 + w) - w`, accurate for small `|w|`.
pub fn compensated_log(w: Complex64) -> Complex64 {
    if w.norm() < SERIES_RADIUS {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut wk = w * w;
        for k in 2..200 {
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            let term = wk * (sign / k as f64);
            sum += term;
            if term.norm() <= 1e-18 * sum.norm() {
                break;
            }
            wk *= w;
        }
        sum
    } else {
        (Complex64::new(1.0, 0.0) + w).ln() - w
    }
}

/// `(1 + w) ln(1 + w) - w`, accurate for small `|w|`.
pub fn compensated_xlogx(w: Complex64) -> Complex64 {
    if w.norm() < SERIES_RADIUS {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut wk = w * w;
        for k in 2..200 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let term = wk * (sign / (k as f64 * (k as f64 - 1.0)));
            sum += term;
            if term.norm() <= 1e-18 * sum.norm() {
                break;
            }
            wk *= w;
        }
        sum
    } else {
        let one_w = Complex64::new(1.0, 0.0) + w;
        one_w * one_w.ln() - w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, integrate_to_infinity, Tolerance};
    use approx::assert_relative_eq;

    fn upper_gamma_oracle(a: f64, x: f64) -> f64 {
        integrate_to_infinity(
            |t: f64| t.powf(a - 1.0) * (-t).exp(),
            x,
            Tolerance::new(1e-15, 1e-13),
        )
        .unwrap()
        .value
    }

    #[test]
    fn e1_matches_quadrature() {
        for &x in &[1e-4, 0.3, 1.0, 2.5, 10.0, 40.0] {
            assert_relative_eq!(exp_integral_e1(x), upper_gamma_oracle(0.0, x), max_relative = 1e-10);
        }
    }

    #[test]
    fn upper_gamma_negative_orders() {
        for &a in &[-1.5, -1.0, -0.4, 0.0, 0.5, 1.6, 2.5] {
            for &x in &[1e-3, 0.2, 1.0, 1.9, 3.0, 25.0] {
                let got = upper_gamma(a, x);
                let want = upper_gamma_oracle(a, x);
                assert_relative_eq!(got, want, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn lower_gamma_matches_quadrature() {
        for &a in &[0.1, 0.6, 1.5, 2.9] {
            for &x in &[1e-6, 1e-2, 1.0, 7.0] {
                let want = integrate(
                    |t: f64| t.powf(a - 1.0) * (-t).exp(),
                    0.0,
                    x,
                    Tolerance::new(1e-300, 1e-13),
                )
                .unwrap()
                .value;
                assert_relative_eq!(lower_gamma(a, x), want, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn compensated_forms_agree_across_series_switch() {
        for &y in &[-1.0, 0.4, 1.4, 1.9] {
            let w = Complex64::new(0.0, SERIES_RADIUS * 0.999);
            let series = compensated_pow(y, w);
            let direct = (Complex64::new(1.0, 0.0) + w).powf(y) - 1.0 - w * y;
            assert!((series - direct).norm() < 1e-14, "y={y}");
        }
        let w = Complex64::new(0.1, -0.2);
        let d = (Complex64::new(1.0, 0.0) + w).ln() - w;
        assert!((compensated_log(w) - d).norm() < 1e-15);
        let d = (Complex64::new(1.0, 0.0) + w) * (Complex64::new(1.0, 0.0) + w).ln() - w;
        assert!((compensated_xlogx(w) - d).norm() < 1e-15);
    }
}
