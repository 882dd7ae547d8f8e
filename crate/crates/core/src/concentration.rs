//! Concentration function `h(r)`, truncated drift `b_r` and the inverse `h⁻¹`.

use std::path::Path;

use serde::Serialize;

use crate::error::{LevyError, Result};
use crate::model::ProcessSpec;
use crate::report::{write_table, Band, BoundReport};

/// `h(r) = σ²/r² + ∫(1 ∧ x²/r²) ν(dx)`.
pub fn h(spec: &ProcessSpec, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(LevyError::InvalidParameter(format!("h needs r > 0, got {r}")));
    }
    let m = spec.measure();
    let sigma = spec.sigma();
    let r2 = r * r;
    let jumps = m.second_moment_below(r)? / r2 + m.upper_tail(r) + m.lower_tail(r);
    Ok(sigma * sigma / r2 + jumps)
}

/// `b_r = γ + ∫ x (1_{(-r,r)}(x) - 1_{(-1,1)}(x)) ν(dx)`.
pub fn b_r(spec: &ProcessSpec, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(LevyError::InvalidParameter(format!("b_r needs r > 0, got {r}")));
    }
    let gamma = spec.triplet().gamma;
    if r == 1.0 {
        return Ok(gamma);
    }
    let (lo, hi, sign) = if r > 1.0 { (1.0, r, 1.0) } else { (r, 1.0, -1.0) };
    let annulus = spec
        .measure()
        .signed_first_moment(lo, hi)?
        .ok_or_else(|| LevyError::NotIntegrable(format!("first moment on [{lo}, {hi})")))?;
    Ok(gamma + sign * annulus)
}

/// Limits of `h`: `(lim_{r→∞} h, lim_{r→0} h)`, i.e. `(0, ν(ℝ))` for
/// compound Poisson jumps without a Gaussian part and `(0, ∞)` otherwise.
pub fn h_range(spec: &ProcessSpec) -> (f64, f64) {
    if spec.sigma() > 0.0 {
        return (0.0, f64::INFINITY);
    }
    match spec.measure().total_mass() {
        Some(mass) => (0.0, mass),
        None => (0.0, f64::INFINITY),
    }
}

/// Solves `h(r) = u` by bisection in `log r`.
pub fn h_inv(spec: &ProcessSpec, u: f64) -> Result<f64> {
    let (lower, upper) = h_range(spec);
    if !(u > lower && u < upper) {
        return Err(LevyError::OutOfRange { value: u, lower, upper });
    }
    let mut lo = 1.0f64;
    let mut hi = 1.0f64;
    // h is non-increasing: h(lo) ≥ u ≥ h(hi)
    let mut steps = 0;
    while h(spec, lo)? < u {
        lo *= 0.1;
        steps += 1;
        if steps > 300 {
            return Err(LevyError::OutOfRange { value: u, lower, upper });
        }
    }
    while h(spec, hi)? > u {
        hi *= 10.0;
        steps += 1;
        if steps > 600 {
            return Err(LevyError::OutOfRange { value: u, lower, upper });
        }
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    while b - a > 1e-14 * (1.0 + a.abs().max(b.abs())) {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if h(spec, mid.exp())? >= u {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// `sup_{|x| ≤ 1/r} Re ψ(x)` from 512 log-spaced points plus golden-section
/// refinement around the best grid point.
pub fn sup_re_psi(spec: &ProcessSpec, r: f64) -> f64 {
    let top = 1.0 / r;
    let n = 512;
    let lo = top * 1e-6;
    let grid = crate::model::log_grid(lo, top, n);
    let vals: Vec<f64> = grid.iter().map(|&x| spec.re_psi(x)).collect();
    let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
    for (i, &v) in vals.iter().enumerate() {
        if v > best {
            best = v;
            best_i = i;
        }
    }
    if best_i == 0 || best_i == n - 1 {
        return best;
    }
    // golden section on log x inside the neighbouring cell pair
    let f = |u: f64| spec.re_psi(u.exp());
    let (mut a, mut b) = (grid[best_i - 1].ln(), grid[best_i + 1].ln());
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    best.max(fc).max(fd)
}

/// One row of the concentration table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub r: f64,
    pub h: f64,
    pub b_r: f64,
    pub sup_re_psi: f64,
}

/// Evaluators for `h`, `b_r` and `h⁻¹` of one process.
#[derive(Clone, Debug)]
pub struct ConcentrationProfile {
    spec: ProcessSpec,
    /// Relative accuracy targeted by `h_inv`.
    pub inversion_tolerance: f64,
}

impl ConcentrationProfile {
    pub fn new(spec: &ProcessSpec) -> Self {
        ConcentrationProfile {
            spec: spec.clone(),
            inversion_tolerance: 1e-8,
        }
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    pub fn h(&self, r: f64) -> Result<f64> {
        h(&self.spec, r)
    }

    pub fn b(&self, r: f64) -> Result<f64> {
        b_r(&self.spec, r)
    }

    pub fn h_inv(&self, u: f64) -> Result<f64> {
        h_inv(&self.spec, u)
    }

    pub fn sup_re_psi(&self, r: f64) -> f64 {
        sup_re_psi(&self.spec, r)
    }

    pub fn table(&self, grid: &[f64]) -> Result<Vec<ConcentrationRow>> {
        grid.iter()
            .map(|&r| {
                Ok(ConcentrationRow {
                    r,
                    h: self.h(r)?,
                    b_r: self.b(r)?,
                    sup_re_psi: self.sup_re_psi(r),
                })
            })
            .collect()
    }

    /// CSV with columns `r,h,b_r,sup_re_psi`.
    pub fn write_csv(&self, grid: &[f64], path: &Path) -> Result<()> {
        let rows: Vec<Vec<f64>> = self
            .table(grid)?
            .into_iter()
            .map(|t| vec![t.r, t.h, t.b_r, t.sup_re_psi])
            .collect();
        write_table(path, &["r", "h", "b_r", "sup_re_psi"], &rows)
    }

    /// `sup_{|x|≤1/r} Re ψ / h(r)`, expected in `[1/24, 2]`.
    pub fn sandwich_report(&self, grid: &[f64]) -> Result<BoundReport> {
        let mut rep = BoundReport::new(
            "h-sandwich",
            &["r"],
            Band::Interval {
                lower: 1.0 / 24.0,
                upper: 2.0,
            },
        );
        for &r in grid {
            rep.push(&[r], self.sup_re_psi(r), self.h(r)?);
        }
        Ok(rep.finish())
    }

    /// `λ² h(λr) / h(r)` for `λ ∈ (0, 1]`, expected `≤ 1`.
    pub fn scaling_report(&self, grid: &[f64], lambdas: &[f64]) -> Result<BoundReport> {
        let mut rep = BoundReport::new("h-scaling", &["r", "lambda"], Band::Upper { upper: 1.0 + 1e-9 });
        for &r in grid {
            let hr = self.h(r)?;
            for &l in lambdas {
                rep.push(&[r, l], l * l * self.h(l * r)?, hr);
            }
        }
        Ok(rep.finish())
    }

    /// `|b_r| / (r h(r))`; the report passes when the ratio stays finite.
    pub fn drift_report(&self, grid: &[f64]) -> Result<BoundReport> {
        let mut rep = BoundReport::new("b-drift", &["r"], Band::Finite);
        for &r in grid {
            rep.push(&[r], self.b(r)?.abs(), r * self.h(r)?);
        }
        let mut rep = rep.finish();
        rep.note("C", rep.max_ratio);
        Ok(rep)
    }
}
