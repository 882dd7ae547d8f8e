//! Process specifications: parametric families, their Lévy triplets and
//! characteristic exponents.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::measure::{LevyMeasure, PowerComponent, Side};
use crate::error::{LevyError, Result};
use crate::quad::{integrate_log_scale, integrate_oscillatory_tail, Tolerance};
use crate::special::gamma_fn;

/// Lévy triplet `(σ, γ, ν)`, with `ψ(ξ) = σ²ξ² - iγξ - ∫(e^{iξx} - 1 - iξx 1_{(-1,1)}) ν(dx)`.
#[derive(Debug, Clone)]
pub struct LevyTriplet {
    pub sigma: f64,
    pub gamma: f64,
    pub measure: LevyMeasure,
}

impl LevyTriplet {
    pub fn new(sigma: f64, gamma: f64, measure: LevyMeasure) -> Result<Self> {
        let t = LevyTriplet {
            sigma,
            gamma,
            measure,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) || !self.gamma.is_finite() {
            return Err(LevyError::InvalidParameter(format!(
                "need σ >= 0 and finite γ, got σ = {}, γ = {}",
                self.sigma, self.gamma
            )));
        }
        if let LevyMeasure::Power(cs) = &self.measure {
            for c in cs {
                c.validate()?;
            }
        }
        self.measure.check_integrability()?;
        if self.sigma == 0.0 {
            if let Some(mass) = self.measure.total_mass() {
                if mass == 0.0 {
                    return Err(LevyError::InvalidParameter(
                        "pure drift: σ = 0 and ν = 0 leaves no randomness".into(),
                    ));
                }
                let small = self.measure.signed_first_moment(0.0, 1.0)?.unwrap_or(0.0);
                if (self.gamma - small).abs() <= 1e-12 * (1.0 + self.gamma.abs()) {
                    return Err(LevyError::InvalidParameter(
                        "compound Poisson process (finite ν, σ = 0, no drift) is excluded".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn reflected(&self) -> LevyTriplet {
        LevyTriplet {
            sigma: self.sigma,
            gamma: -self.gamma,
            measure: self.measure.reflected(),
        }
    }
}

/// Jump-size law of a compound Poisson component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum JumpLaw {
    /// Exponential jumps with the given signed mean (sign picks the half-line).
    Exponential { mean: f64 },
    /// Two-sided exponential: up with probability `p_up`, rates `eta_up`, `eta_down`.
    DoubleExponential { p_up: f64, eta_up: f64, eta_down: f64 },
}

impl JumpLaw {
    fn components(&self, rate: f64) -> Result<Vec<PowerComponent>> {
        match *self {
            JumpLaw::Exponential { mean } => {
                if mean == 0.0 || !mean.is_finite() {
                    return Err(LevyError::InvalidParameter("exponential jump mean must be nonzero".into()));
                }
                let eta = 1.0 / mean.abs();
                let side = if mean > 0.0 { Side::Positive } else { Side::Negative };
                Ok(vec![PowerComponent::new(side, rate * eta, -1.0, eta)?])
            }
            JumpLaw::DoubleExponential { p_up, eta_up, eta_down } => {
                if !(0.0..=1.0).contains(&p_up) {
                    return Err(LevyError::InvalidParameter("p_up must lie in [0, 1]".into()));
                }
                let mut v = Vec::new();
                if p_up > 0.0 {
                    v.push(PowerComponent::new(Side::Positive, rate * p_up * eta_up, -1.0, eta_up)?);
                }
                if p_up < 1.0 {
                    v.push(PowerComponent::new(
                        Side::Negative,
                        rate * (1.0 - p_up) * eta_down,
                        -1.0,
                        eta_down,
                    )?);
                }
                Ok(v)
            }
        }
    }

    fn reflected(&self) -> JumpLaw {
        match *self {
            JumpLaw::Exponential { mean } => JumpLaw::Exponential { mean: -mean },
            JumpLaw::DoubleExponential { p_up, eta_up, eta_down } => JumpLaw::DoubleExponential {
                p_up: 1.0 - p_up,
                eta_up: eta_down,
                eta_down: eta_up,
            },
        }
    }
}

fn default_scale() -> f64 {
    1.0
}

/// Parametric family of a Lévy process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Strictly stable law with `ψ(ξ) = scale·|ξ|^α (1 - iβ sgn(ξ) tan(πα/2))`
    /// (`α = 2`: `scale·ξ²`; `α = 1` only symmetric).
    Stable {
        alpha: f64,
        #[serde(default)]
        beta: f64,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// Tempered stable (CGMY/KoBoL) with possibly different indices per side
    /// and a prescribed mean of `X_1`. Density `c_pos e^{-m x} x^{-1-y_pos}` on
    /// `x > 0` and `c_neg e^{-g|x|} |x|^{-1-y_neg}` on `x < 0`.
    Cgmy {
        c_pos: f64,
        c_neg: f64,
        g: f64,
        m: f64,
        y_pos: f64,
        y_neg: f64,
        #[serde(default)]
        mean: f64,
    },
    /// `σ` Brownian part plus compound Poisson jumps, with prescribed mean of `X_1`.
    BrownianJumps {
        sigma: f64,
        rate: f64,
        jumps: JumpLaw,
        #[serde(default)]
        mean: f64,
    },
    /// Raw triplet built from power components.
    Triplet {
        sigma: f64,
        gamma: f64,
        components: Vec<PowerComponent>,
    },
}

impl Family {
    pub fn brownian() -> Family {
        Family::Stable {
            alpha: 2.0,
            beta: 0.0,
            scale: 1.0,
        }
    }

    pub fn cgmy(c: f64, g: f64, m: f64, y: f64) -> Family {
        Family::Cgmy {
            c_pos: c,
            c_neg: c,
            g,
            m,
            y_pos: y,
            y_neg: y,
            mean: 0.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Stable { .. } => "stable",
            Family::Cgmy { .. } => "cgmy",
            Family::BrownianJumps { .. } => "brownian_jumps",
            Family::Triplet { .. } => "triplet",
        }
    }

    fn reflected(&self) -> Family {
        match self.clone() {
            Family::Stable { alpha, beta, scale } => Family::Stable {
                alpha,
                beta: -beta,
                scale,
            },
            Family::Cgmy {
                c_pos,
                c_neg,
                g,
                m,
                y_pos,
                y_neg,
                mean,
            } => Family::Cgmy {
                c_pos: c_neg,
                c_neg: c_pos,
                g: m,
                m: g,
                y_pos: y_neg,
                y_neg: y_pos,
                mean: -mean,
            },
            Family::BrownianJumps {
                sigma,
                rate,
                jumps,
                mean,
            } => Family::BrownianJumps {
                sigma,
                rate,
                jumps: jumps.reflected(),
                mean: -mean,
            },
            Family::Triplet {
                sigma,
                gamma,
                components,
            } => Family::Triplet {
                sigma,
                gamma: -gamma,
                components: components.iter().map(|c| c.reflected()).collect(),
            },
        }
    }

    fn triplet(&self) -> Result<LevyTriplet> {
        match *self {
            Family::Stable { alpha, beta, scale } => stable_triplet(alpha, beta, scale),
            Family::Cgmy {
                c_pos,
                c_neg,
                g,
                m,
                y_pos,
                y_neg,
                mean,
            } => {
                let mut cs = Vec::new();
                if c_pos > 0.0 {
                    cs.push(PowerComponent::new(Side::Positive, c_pos, y_pos, m)?);
                }
                if c_neg > 0.0 {
                    cs.push(PowerComponent::new(Side::Negative, c_neg, y_neg, g)?);
                }
                if c_pos < 0.0 || c_neg < 0.0 {
                    return Err(LevyError::InvalidParameter("CGMY weights must be >= 0".into()));
                }
                if (c_pos > 0.0 && m <= 0.0) || (c_neg > 0.0 && g <= 0.0) {
                    return Err(LevyError::InvalidParameter("CGMY tempering G, M must be > 0".into()));
                }
                triplet_with_mean(0.0, LevyMeasure::Power(cs), mean)
            }
            Family::BrownianJumps {
                sigma,
                rate,
                jumps,
                mean,
            } => {
                if rate < 0.0 || !rate.is_finite() {
                    return Err(LevyError::InvalidParameter("jump rate must be >= 0".into()));
                }
                let cs = if rate > 0.0 { jumps.components(rate)? } else { Vec::new() };
                triplet_with_mean(sigma, LevyMeasure::Power(cs), mean)
            }
            Family::Triplet {
                sigma,
                gamma,
                ref components,
            } => LevyTriplet::new(sigma, gamma, LevyMeasure::Power(components.clone())),
        }
    }
}

fn triplet_with_mean(sigma: f64, measure: LevyMeasure, mean: f64) -> Result<LevyTriplet> {
    let big = measure
        .signed_first_moment(1.0, f64::INFINITY)?
        .ok_or_else(|| LevyError::InvalidParameter("mean requested but E|X_1| is infinite".into()))?;
    LevyTriplet::new(sigma, mean - big, measure)
}

fn stable_triplet(alpha: f64, beta: f64, scale: f64) -> Result<LevyTriplet> {
    if !(alpha > 0.0 && alpha <= 2.0) || !(-1.0..=1.0).contains(&beta) || !(scale > 0.0) {
        return Err(LevyError::InvalidParameter(format!(
            "stable needs α ∈ (0, 2], β ∈ [-1, 1], scale > 0; got ({alpha}, {beta}, {scale})"
        )));
    }
    if alpha == 2.0 {
        return LevyTriplet::new(scale.sqrt(), 0.0, LevyMeasure::zero());
    }
    let (total, gamma) = if (alpha - 1.0).abs() < 1e-12 {
        if beta != 0.0 {
            return Err(LevyError::InvalidParameter(
                "α = 1 stable is only supported symmetric (β = 0)".into(),
            ));
        }
        (2.0 * scale / PI, 0.0)
    } else {
        let total = scale / (-gamma_fn(-alpha) * (PI * alpha / 2.0).cos());
        (total, beta * total / (1.0 - alpha))
    };
    let c_pos = 0.5 * (1.0 + beta) * total;
    let c_neg = 0.5 * (1.0 - beta) * total;
    let mut cs = Vec::new();
    if c_pos > 0.0 {
        cs.push(PowerComponent::new(Side::Positive, c_pos, alpha, 0.0)?);
    }
    if c_neg > 0.0 {
        cs.push(PowerComponent::new(Side::Negative, c_neg, alpha, 0.0)?);
    }
    LevyTriplet::new(0.0, gamma, LevyMeasure::Power(cs))
}

/// An immutable, validated Lévy process.
#[derive(Debug, Clone)]
pub struct ProcessSpec {
    pub label: String,
    family: Option<Family>,
    triplet: LevyTriplet,
}

impl ProcessSpec {
    pub fn new(family: Family) -> Result<Self> {
        let triplet = family.triplet()?;
        Ok(ProcessSpec {
            label: family.name().to_string(),
            family: Some(family),
            triplet,
        })
    }

    /// A process given only by its triplet (possibly with a custom density).
    pub fn from_triplet(label: impl Into<String>, triplet: LevyTriplet) -> Result<Self> {
        triplet.validate()?;
        Ok(ProcessSpec {
            label: label.into(),
            family: None,
            triplet,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn family(&self) -> Option<&Family> {
        self.family.as_ref()
    }

    pub fn triplet(&self) -> &LevyTriplet {
        &self.triplet
    }

    pub fn sigma(&self) -> f64 {
        self.triplet.sigma
    }

    pub fn measure(&self) -> &LevyMeasure {
        &self.triplet.measure
    }

    /// The dual process `-X`.
    pub fn dual(&self) -> ProcessSpec {
        ProcessSpec {
            label: format!("dual({})", self.label),
            family: self.family.as_ref().map(Family::reflected),
            triplet: self.triplet.reflected(),
        }
    }

    /// `(α, β, scale)` when the process is strictly stable.
    pub fn stable_parameters(&self) -> Option<(f64, f64, f64)> {
        match self.family {
            Some(Family::Stable { alpha, beta, scale }) => Some((alpha, beta, scale)),
            _ => None,
        }
    }

    /// `P(X_t > 0)` for strictly stable processes, constant in `t`.
    pub fn stable_positivity(&self) -> Option<f64> {
        let (alpha, beta, _) = self.stable_parameters()?;
        if alpha == 2.0 || (alpha - 1.0).abs() < 1e-12 {
            return Some(0.5);
        }
        Some(0.5 + (beta * (PI * alpha / 2.0).tan()).atan() / (PI * alpha))
    }

    /// Structural symmetry: ν symmetric and γ = 0.
    pub fn is_symmetric(&self) -> bool {
        if self.triplet.gamma.abs() > 1e-14 {
            return false;
        }
        match &self.triplet.measure {
            LevyMeasure::Power(cs) => {
                let mut pos: Vec<_> = cs
                    .iter()
                    .filter(|c| c.side == Side::Positive)
                    .map(|c| (c.weight, c.index, c.tempering))
                    .collect();
                let mut neg: Vec<_> = cs
                    .iter()
                    .filter(|c| c.side == Side::Negative)
                    .map(|c| (c.weight, c.index, c.tempering))
                    .collect();
                let key = |a: &(f64, f64, f64), b: &(f64, f64, f64)| {
                    a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
                };
                pos.sort_by(key);
                neg.sort_by(key);
                pos.len() == neg.len()
                    && pos.iter().zip(&neg).all(|(a, b)| {
                        (a.0 - b.0).abs() <= 1e-12 * a.0 && a.1 == b.1 && a.2 == b.2
                    })
            }
            LevyMeasure::Custom(_) => [0.01, 0.1, 1.0, 10.0]
                .iter()
                .all(|&x| (self.measure().density(x) - self.measure().density(-x)).abs() < 1e-14),
        }
    }

    /// Characteristic exponent `ψ(ξ)`; closed form where the measure admits one.
    pub fn psi(&self, xi: f64) -> Complex64 {
        let t = &self.triplet;
        let gauss = Complex64::new(t.sigma * t.sigma * xi * xi, -t.gamma * xi);
        match t.measure.truncated_exponent(xi) {
            Some(j) => {
                let mut v = gauss - j;
                if v.re < 0.0 {
                    v.re = 0.0;
                }
                v
            }
            None => self
                .psi_quadrature(xi)
                .expect("quadrature of the exponent failed; use psi_quadrature for diagnostics"),
        }
    }

    pub fn re_psi(&self, xi: f64) -> f64 {
        self.psi(xi).re
    }

    /// Exponent for the strictly stable family via `scale|ξ|^α(1 - iβ sgn ξ tan(πα/2))`.
    pub fn psi_stable_closed_form(&self, xi: f64) -> Option<Complex64> {
        let (alpha, beta, scale) = self.stable_parameters()?;
        if xi == 0.0 {
            return Some(Complex64::new(0.0, 0.0));
        }
        if alpha == 2.0 {
            return Some(Complex64::new(scale * xi * xi, 0.0));
        }
        let a = scale * xi.abs().powf(alpha);
        let skew = if (alpha - 1.0).abs() < 1e-12 {
            0.0
        } else {
            -beta * xi.signum() * (PI * alpha / 2.0).tan()
        };
        Some(Complex64::new(a, a * skew))
    }

    /// `ψ(ξ)` by adaptive quadrature of the Lévy–Khintchine integral, splitting
    /// at `|x| = 1/|ξ|` and `|x| = 1`.
    pub fn psi_quadrature(&self, xi: f64) -> Result<Complex64> {
        let t = &self.triplet;
        let gauss = Complex64::new(t.sigma * t.sigma * xi * xi, -t.gamma * xi);
        if xi == 0.0 || t.measure.is_zero() {
            return Ok(gauss);
        }
        // Re ψ decays no faster than ξ² at the origin
        let tol = Tolerance::new(1e-11 * xi.abs().powi(2).min(1.0), 1e-9).with_max_intervals(5000);
        let mut jump = Complex64::new(0.0, 0.0);
        let cut = (1.0 / xi.abs()).min(1.0);
        let far = (1.0 / xi.abs()).max(1.0);
        for side in [Side::Positive, Side::Negative] {
            let s = side.sign();
            let dens = |u: f64| t.measure.density(s * u);
            // |x| < 1: compensated integrand, rewritten to avoid cancellation
            let inner = |u: f64| {
                let th = s * xi * u;
                let re = -2.0 * (0.5 * th).sin().powi(2);
                let im = if th.abs() < 1e-3 {
                    -th.powi(3) / 6.0 + th.powi(5) / 120.0
                } else {
                    th.sin() - th
                };
                Complex64::new(re, im) * dens(u)
            };
            let pts: Vec<f64> = if cut < 1.0 { vec![0.0, cut, 1.0] } else { vec![0.0, 1.0] };
            jump += crate::quad::integrate_breaks(inner, &pts, tol)?.value;
            // 1 ≤ |x| < 1/|ξ|: the phase is small, so integrate the deviations
            // from 1 and θ and add the first moment back separately
            if far > 1.0 {
                let near = |u: f64| {
                    let th = s * xi * u;
                    let im = if th.abs() < 1e-3 {
                        -th.powi(3) / 6.0 + th.powi(5) / 120.0
                    } else {
                        th.sin() - th
                    };
                    Complex64::new(-2.0 * (0.5 * th).sin().powi(2), im) * dens(u)
                };
                jump += integrate_log_scale(near, 1.0, far, &[], tol)?.value;
                let m1 = integrate_log_scale(|u: f64| u * dens(u), 1.0, far, &[], Tolerance::new(1e-300, 1e-12))?;
                jump += Complex64::new(0.0, s * xi * m1.value);
            }
            // |x| ≥ max(1, 1/|ξ|): oscillatory Fourier tail minus the tail mass
            let panel = PI / xi.abs();
            let cos_part = integrate_oscillatory_tail(|u: f64| (s * xi * u).cos() * dens(u), far, panel, tol, 20_000)?;
            let sin_part = integrate_oscillatory_tail(|u: f64| (s * xi * u).sin() * dens(u), far, panel, tol, 20_000)?;
            jump += Complex64::new(cos_part.value - t.measure.tail(side, far), sin_part.value);
        }
        let mut v = gauss - jump;
        if v.re < 0.0 {
            v.re = 0.0;
        }
        Ok(v)
    }

    /// `E X_1 = γ + ∫_{|x|≥1} x ν(dx)`, `None` when the first moment diverges.
    pub fn mean_x1(&self) -> Option<f64> {
        let big = self.triplet.measure.signed_first_moment(1.0, f64::INFINITY).ok()??;
        Some(self.triplet.gamma + big)
    }

    pub fn is_zero_mean(&self, tol: f64) -> bool {
        self.mean_x1().is_some_and(|m| m.abs() <= tol)
    }

    /// Paths of unbounded variation: `σ > 0` or `∫_{|x|<1}|x| ν(dx) = ∞`.
    pub fn has_unbounded_variation(&self) -> bool {
        self.triplet.sigma > 0.0
            || matches!(self.triplet.measure.abs_first_moment_below_one(), Ok(None))
    }

    /// Symmetry of the exponent checked on a grid: `|Im ψ| ≤ tol (1 + Re ψ)`.
    pub fn exponent_is_real(&self, grid: &[f64], tol: f64) -> bool {
        grid.iter().all(|&x| {
            let p = self.psi(x);
            p.im.abs() <= tol * (1.0 + p.re)
        })
    }
}
