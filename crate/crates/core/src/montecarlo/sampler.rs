//! One-step samplers: Chambers–Mallows–Stuck for strictly stable laws, and
//! an Asmussen–Rosiński scheme (large jumps exactly, small jumps replaced by a
//! Gaussian) for everything built from power components.

use std::f64::consts::{FRAC_PI_2, PI};


use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson, StandardNormal};

use crate::concentration::b_r;
use crate::error::{LevyError, Result};
use crate::model::{PowerComponent, ProcessSpec};

#[derive(Clone, Debug)]
pub struct JumpSource {
    sign: f64,
    index: f64,
    tempering: f64,
    /// Cumulative rate of this and all previous sources.
    cumulative: f64,
}

/// Where a step ended and whether a visit stopped it early.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub elapsed: f64,
    pub position: f64,
    pub stopped: bool,
}

impl StepOutcome {
    fn new(elapsed: f64, position: f64, stopped: bool) -> Self {
        StepOutcome {
            elapsed,
            position,
            stopped,
        }
    }
}

/// Step-independent constants of the Chambers–Mallows–Stuck transform.
#[derive(Clone, Copy, Debug)]
pub struct CmsConstants {
    alpha: f64,
    inv_alpha: f64,
    exponent: f64,
    shift: f64,
    factor: f64,
}

impl CmsConstants {
    pub fn new(alpha: f64, beta: f64) -> Self {
        let t = beta * (FRAC_PI_2 * alpha).tan();
        CmsConstants {
            alpha,
            inv_alpha: 1.0 / alpha,
            exponent: (1.0 - alpha) / alpha,
            shift: t.atan() / alpha,
            factor: (1.0 + t * t).powf(0.5 / alpha),
        }
    }

    /// A unit-scale draw.
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let a = self.alpha;
        if a == 2.0 {
            let z: f64 = StandardNormal.sample(rng);
            return std::f64::consts::SQRT_2 * z;
        }
        let v = PI * (rng.gen::<f64>() - 0.5);
        if (a - 1.0).abs() < 1e-12 {
            return v.tan();
        }
        let w: f64 = Exp1.sample(rng);
        let av = a * (v + self.shift);
        let log_mag = -self.inv_alpha * v.cos().ln() + self.exponent * ((v - av).cos() / w).ln();
        self.factor * av.sin() * log_mag.exp()
    }
}

/// Per-path memo of the stable step scale `(c dt)^{1/α}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct StepCache {
    dt: f64,
    scale: f64,
}

#[derive(Clone, Debug)]
pub enum Sampler {
    Stable {
        alpha: f64,
        beta: f64,
        scale: f64,
        cms: CmsConstants,
    },
    Jumps {
        drift: f64,
        /// Variance per unit time of the Gaussian part (Brownian plus small jumps).
        var_rate: f64,
        sources: Vec<JumpSource>,
        total_rate: f64,
        eps: f64,
    },
}

impl Sampler {
    /// Chooses the exact stable sampler when the process is strictly stable,
    /// otherwise truncates jumps at `eps`.
    pub fn new(spec: &ProcessSpec, eps: f64) -> Result<Self> {
        if let Some((alpha, beta, scale)) = spec.stable_parameters() {
            return Ok(Sampler::Stable {
                alpha,
                beta,
                scale,
                cms: CmsConstants::new(alpha, beta),
            });
        }
        Self::truncated(spec, eps)
    }

    /// The Asmussen–Rosiński sampler even for stable processes.
    pub fn truncated(spec: &ProcessSpec, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(LevyError::InvalidParameter(format!("jump cutoff must be > 0, got {eps}")));
        }
        let comps: &[PowerComponent] = spec.measure().components().ok_or_else(|| {
            LevyError::Unsupported("path simulation needs a measure made of power components".into())
        })?;
        let mut sources = Vec::new();
        let mut total = 0.0;
        let mut small = 0.0;
        for c in comps {
            total += c.tail(eps);
            small += c.second_moment_below(eps);
            sources.push(JumpSource {
                sign: c.side.sign(),
                index: c.index,
                tempering: c.tempering,
                cumulative: total,
            });
        }
        let sigma = spec.sigma();
        Ok(Sampler::Jumps {
            drift: b_r(spec, eps)?,
            var_rate: 2.0 * sigma * sigma + small,
            sources,
            total_rate: total,
            eps,
        })
    }

    /// One increment over `dt`.
    pub fn increment<R: Rng + ?Sized>(&self, rng: &mut R, dt: f64) -> f64 {
        self.advance(&mut StepCache::default(), rng, 0.0, dt, |_, _| false).position
    }

    /// Moves from `x` over `dt`, calling `visit(elapsed, position)` after each
    /// large jump (and the continuous motion before it) and at the end of the
    /// step. Stops early when `visit` returns `true`.
    pub fn advance<R, F>(&self, cache: &mut StepCache, rng: &mut R, x: f64, dt: f64, mut visit: F) -> StepOutcome
    where
        R: Rng + ?Sized,
        F: FnMut(f64, f64) -> bool,
    {
        match *self {
            Sampler::Stable { scale, ref cms, .. } => {
                if cache.dt != dt {
                    *cache = StepCache {
                        dt,
                        scale: (scale * dt).powf(cms.inv_alpha),
                    };
                }
                let y = x + cache.scale * cms.draw(rng);
                StepOutcome::new(dt, y, visit(dt, y))
            }
            Sampler::Jumps {
                drift,
                var_rate,
                ref sources,
                total_rate,
                eps,
            } => {
                let n = if total_rate > 0.0 {
                    Poisson::new(total_rate * dt).expect("positive rate").sample(rng) as usize
                } else {
                    0
                };
                let mut times: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * dt).collect();
                times.sort_by(f64::total_cmp);
                let mut pos = x;
                let mut now = 0.0;
                for &t in &times {
                    pos += continuous(rng, drift, var_rate, t - now);
                    now = t;
                    if visit(now, pos) {
                        return StepOutcome::new(now, pos, true);
                    }
                    pos += jump(rng, sources, total_rate, eps);
                    if visit(now, pos) {
                        return StepOutcome::new(now, pos, true);
                    }
                }
                pos += continuous(rng, drift, var_rate, dt - now);
                StepOutcome::new(dt, pos, visit(dt, pos))
            }
        }
    }
}

fn continuous<R: Rng + ?Sized>(rng: &mut R, drift: f64, var_rate: f64, dt: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    drift * dt + (var_rate * dt).sqrt() * z
}

fn jump<R: Rng + ?Sized>(rng: &mut R, sources: &[JumpSource], total: f64, eps: f64) -> f64 {
    let u = rng.gen::<f64>() * total;
    let s = sources
        .iter()
        .find(|s| u < s.cumulative)
        .unwrap_or_else(|| sources.last().expect("jumps need a source"));
    s.sign * jump_size(rng, s.index, s.tempering, eps)
}

/// A draw from the density `∝ u^{-1-y} e^{-λu}` on `[eps, ∞)`.
pub fn jump_size<R: Rng + ?Sized>(rng: &mut R, y: f64, lambda: f64, eps: f64) -> f64 {
    if y > 0.0 {
        // Pareto proposal, tempering by rejection
        loop {
            let u = eps * (1.0 - rng.gen::<f64>()).powf(-1.0 / y);
            if lambda == 0.0 || rng.gen::<f64>() < (-lambda * (u - eps)).exp() {
                return u;
            }
        }
    }
    let a = -y;
    if a == 1.0 {
        let e: f64 = Exp1.sample(rng);
        return eps + e / lambda;
    }
    if a > 0.0 {
        let g = Gamma::new(a, 1.0 / lambda).expect("valid gamma");
        loop {
            let u: f64 = g.sample(rng);
            if u >= eps {
                return u;
            }
        }
    }
    // a = 0: envelope u^{-1} on [eps, 1/λ] and λ e^{-λu} beyond
    let m = 1.0 / lambda;
    let w1 = if eps < m { (m / eps).ln() } else { 0.0 };
    let w2 = (-lambda * eps.max(m)).exp();
    loop {
        if rng.gen::<f64>() * (w1 + w2) < w1 {
            let u = eps * (m / eps).powf(rng.gen::<f64>());
            if rng.gen::<f64>() < (-lambda * u).exp() {
                return u;
            }
        } else {
            let start = eps.max(m);
            let e: f64 = Exp1.sample(rng);
            let u = start + e / lambda;
            if rng.gen::<f64>() < m / u {
                return u;
            }
        }
    }
}

/// Chambers–Mallows–Stuck draw with characteristic function
/// `exp(-c|ξ|^α (1 - iβ sgn(ξ) tan(πα/2)))`.
pub fn stable_variate<R: Rng + ?Sized>(rng: &mut R, alpha: f64, beta: f64, c: f64) -> f64 {
    c.powf(1.0 / alpha) * CmsConstants::new(alpha, beta).draw(rng)
}
