//! Renewal-side inequalities evaluated on grids.

use crate::concentration::ConcentrationProfile;
use crate::error::Result;
use crate::model::ProcessSpec;
use crate::quad::{integrate_log_scale, Tolerance};
use crate::report::{Band, BoundReport};

use super::conditions::{creeping_condition, linearity_large_condition, ConditionReport};
use super::renewal::{renewal_v, stable_renewal, symmetric_sqrt_h, RenewalFunction};
use super::LadderExponent;

/// Default acceptance factor for comparability with unknown constants.
pub const DEFAULT_SPREAD: f64 = 50.0;

/// Everything computed for one process: ladder exponents, `V`, `V̂` and the
/// concentration profile.
#[derive(Clone, Debug)]
pub struct FluctuationModel {
    pub ladder: LadderExponent,
    pub v: RenewalFunction,
    pub v_hat: RenewalFunction,
    pub conc: ConcentrationProfile,
}

impl FluctuationModel {
    pub fn build(spec: &ProcessSpec) -> Result<Self> {
        let ladder = LadderExponent::new(spec)?;
        let dual = ladder.dual();
        let (v, v_hat) = if spec.is_symmetric() {
            let v = renewal_v(&ladder)?;
            (v.clone(), v)
        } else {
            (renewal_v(&ladder)?, renewal_v(&dual)?)
        };
        Ok(FluctuationModel {
            ladder,
            v,
            v_hat,
            conc: ConcentrationProfile::new(spec),
        })
    }

    pub fn spec(&self) -> &ProcessSpec {
        self.ladder.spec()
    }

    /// Largest relative gap between the inverted `V`, `V̂` and the stable
    /// closed forms, `None` for non-stable processes.
    pub fn stable_oracle_gap(&self) -> Option<f64> {
        let exact = stable_renewal(&self.ladder)?;
        let exact_hat = stable_renewal(&self.ladder.dual())?;
        let mut worst: f64 = 0.0;
        for &x in &self.v.xs {
            worst = worst.max((self.v.eval(x) / exact.eval(x) - 1.0).abs());
            worst = worst.max((self.v_hat.eval(x) / exact_hat.eval(x) - 1.0).abs());
        }
        Some(worst)
    }

    /// `κ(z,0) κ̂(z,0) / z`; the note `fourier_gap` compares `κ(z,0)` with
    /// an evaluation that does not use the positivity cache.
    pub fn kappa_identity_report(&self, zs: &[f64], tol: f64) -> Result<BoundReport> {
        let dual = self.ladder.dual();
        let rows = crate::parallel::try_map(zs, |&z| -> Result<(f64, f64)> {
            Ok((self.ladder.kappa_time(z)?, dual.kappa_time(z)?))
        })?;
        let mut r = BoundReport::new(
            "kappa-identity",
            &["z", "kappa", "kappa_hat"],
            Band::Interval {
                lower: 1.0 - tol,
                upper: 1.0 + tol,
            },
        );
        for (&z, (k, kh)) in zs.iter().zip(rows) {
            r.push(&[z, k, kh], k * kh, z);
        }
        let mut r = r.finish();
        // the cached-ρ route against the positivity-free Fourier route
        let gaps = crate::parallel::try_map(zs, |&z| -> Result<f64> {
            Ok((self.ladder.kappa_time(z)? / self.ladder.kappa_time_fourier(z)? - 1.0).abs())
        })?;
        r.note("fourier_gap", gaps.into_iter().fold(0.0, f64::max));
        Ok(r)
    }

    /// `κ(λz,0) ≤ c λ^ρ κ(z,0)` and `c^{-1} λ^{1-ρ} κ(z,0) ≤ κ(λz,0)` with
    /// `ρ = 1 - η`; the note `c` is the smallest feasible constant.
    pub fn kappa_scaling_report(&self, zs: &[f64], lambdas: &[f64]) -> Result<BoundReport> {
        let eta = self.ladder.positivity_curve().eta_lower;
        let rho = 1.0 - eta;
        let mut args = Vec::new();
        for &z in zs {
            args.push(z);
            for &l in lambdas {
                args.push(l * z);
            }
        }
        args.sort_by(f64::total_cmp);
        args.dedup();
        let vals = crate::parallel::try_map(&args, |&z| self.ladder.kappa_time(z))?;
        let kappa = |z: f64| vals[args.partition_point(|a| *a < z)];
        let mut r = BoundReport::new("kappa-scaling", &["z", "lambda", "side"], Band::Finite);
        for &z in zs {
            for &l in lambdas {
                let (k, kl) = (kappa(z), kappa(l * z));
                r.push(&[z, l, 1.0], kl, l.powf(rho) * k);
                r.push(&[z, l, -1.0], l.powf(1.0 - rho) * k, kl);
            }
        }
        r.note("rho", rho);
        let r = r.finish();
        let c = r.max_ratio;
        let mut r = r;
        r.note("c", c);
        Ok(r)
    }

    /// `h(r) V(r) V̂(r)` over `r`; notes `C1 = max h V V̂` and
    /// `C2 = min (h + |b_r|/r) V V̂`.
    pub fn product_bound_report(&self, rs: &[f64], spread: f64) -> Result<BoundReport> {
        let hb = crate::parallel::try_map(rs, |&r| -> Result<(f64, f64)> { Ok((self.conc.h(r)?, self.conc.b(r)?)) })?;
        let mut rep = BoundReport::new("product-bound", &["r", "h", "b_r", "V", "V_hat"], Band::Spread { factor: spread });
        let mut c2 = f64::INFINITY;
        for (&r, (h, b)) in rs.iter().zip(hb) {
            let (v, vh) = (self.v.eval(r), self.v_hat.eval(r));
            rep.push(&[r, h, b, v, vh], h * v * vh, 1.0);
            c2 = c2.min((h + b.abs() / r) * v * vh);
        }
        let mut rep = rep.finish();
        rep.note("C1", rep.max_ratio);
        rep.note("C2", c2);
        Ok(rep)
    }

    /// `κ(λ,0) V(h^{-1}(λ))` over `λ`.
    pub fn kappa_est_report(&self, lambdas: &[f64], spread: f64) -> Result<BoundReport> {
        let vals = crate::parallel::try_map(lambdas, |&l| -> Result<(f64, f64)> {
            Ok((self.ladder.kappa_time(l)?, self.conc.h_inv(l)?))
        })?;
        let mut rep = BoundReport::new("kappa-est", &["lambda", "h_inv"], Band::Spread { factor: spread });
        for (&l, (k, r)) in lambdas.iter().zip(vals) {
            rep.push(&[l, r], k * self.v.eval(r), 1.0);
        }
        Ok(rep.finish())
    }

    /// `V(λx) / (λ^{α-1} V(x))` for `λ ≥ 1`; passes when the minimum stays above `floor`.
    pub fn v_scaling_report(&self, alpha: f64, xs: &[f64], lambdas: &[f64], floor: f64) -> BoundReport {
        let mut rep = BoundReport::new("v-scaling", &["x", "lambda"], Band::Lower { lower: floor });
        for &x in xs {
            for &l in lambdas {
                rep.push(&[x, l], self.v.eval(l * x), l.powf(alpha - 1.0) * self.v.eval(x));
            }
        }
        let mut rep = rep.finish();
        rep.note("alpha", alpha);
        rep.note("C5", rep.min_ratio);
        rep
    }

    /// `V(r) √h(r)` for a symmetric process.
    pub fn sqrt_h_report(&self, rs: &[f64], spread: f64) -> Result<BoundReport> {
        let cmp = symmetric_sqrt_h(self.spec())?;
        let mut rep = BoundReport::new("v-sqrt-h", &["r"], Band::Spread { factor: spread });
        for &r in rs {
            rep.push(&[r], self.v.eval(r), cmp.eval(r));
        }
        Ok(rep.finish())
    }

    pub fn creeping(&self) -> Result<ConditionReport> {
        creeping_condition(self.spec(), &self.v)
    }

    pub fn linearity_large(&self) -> Result<ConditionReport> {
        linearity_large_condition(self.spec(), &self.v)
    }

    /// `η(x) = ∫_0^∞ ν(x+y, ∞) V̂(dy) = ∫_0^∞ V̂(y) π(x+y) dy`, the tail of the
    /// ladder height Lévy measure.
    pub fn ladder_tail(&self, x: f64) -> Result<f64> {
        let m = self.spec().measure();
        if m.upper_tail(x) == 0.0 {
            return Ok(0.0);
        }
        let (lo, hi) = (1e-12 * x.min(1.0), 1e12 * x.max(1.0));
        let body = integrate_log_scale(
            |y: f64| self.v_hat.eval(y) * m.density(x + y),
            lo,
            hi,
            &[x],
            Tolerance::new(1e-300, 1e-8).with_max_intervals(4000),
        )?
        .value;
        // V̂(y) ≤ V̂(lo) below lo, and the integrand is O(y^{-1-ε}) beyond hi
        Ok(body + self.v_hat.eval(lo) * (m.upper_tail(x) - m.upper_tail(x + lo)))
    }

    /// Jump part `λ ∫_0^∞ e^{-λx} η(x) dx` of the reconstructed exponent.
    fn ladder_jump_part(&self, lam: f64) -> Result<f64> {
        let err = std::cell::Cell::new(None);
        let v = integrate_log_scale(
            |x: f64| match self.ladder_tail(x) {
                Ok(e) => lam * (-lam * x).exp() * e,
                Err(e) => {
                    err.set(Some(e));
                    0.0
                }
            },
            1e-14 / lam,
            50.0 / lam,
            &[1.0 / lam],
            Tolerance::new(1e-300, 1e-7).with_max_intervals(2000),
        )?
        .value;
        match err.take() {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    /// Reconstructs `κ̃(0,λ) = δλ + λ ∫ e^{-λx} η(x) dx` and compares with
    /// `κ(0,λ)`; the drift `δ ≥ 0` is a least-squares fit over the largest
    /// three `λ`. `None` when there are no upward jumps and no Gaussian part.
    pub fn vigon_report(&self, lambdas: &[f64], band: (f64, f64)) -> Result<Option<BoundReport>> {
        let spec = self.spec();
        if spec.measure().upper_tail(1e-300) == 0.0 && spec.sigma() == 0.0 {
            return Ok(None);
        }
        let mut ls = lambdas.to_vec();
        ls.sort_by(f64::total_cmp);
        let vals = crate::parallel::try_map(&ls, |&l| -> Result<(f64, f64)> {
            Ok((self.ladder.kappa_space(l)?, self.ladder_jump_part(l)?))
        })?;
        let top = &vals[vals.len().saturating_sub(3)..];
        let top_l = &ls[ls.len().saturating_sub(3)..];
        let num: f64 = top.iter().zip(top_l).map(|((k, j), l)| l * (k - j)).sum();
        let den: f64 = top_l.iter().map(|l| l * l).sum();
        let delta = (num / den).max(0.0);
        let mut rep = BoundReport::new(
            "vigon-consistency",
            &["lambda", "jump_part"],
            Band::Interval {
                lower: band.0,
                upper: band.1,
            },
        );
        for (&l, (k, j)) in ls.iter().zip(vals) {
            rep.push(&[l, j], delta * l + j, k);
        }
        let mut rep = rep.finish();
        rep.note("delta", delta);
        Ok(Some(rep))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{log_grid, Family, JumpLaw};
    use crate::special::gamma_fn;
    use approx::assert_relative_eq;

    fn stable(alpha: f64, beta: f64) -> ProcessSpec {
        ProcessSpec::new(Family::Stable { alpha, beta, scale: 1.0 }).unwrap()
    }

    #[test]
    fn symmetric_stable_reports() {
        let m = FluctuationModel::build(&stable(1.5, 0.0)).unwrap();
        assert!(m.stable_oracle_gap().unwrap() < 1e-4);
        let rs = log_grid(1e-2, 1e2, 9);
        let p = m.product_bound_report(&rs, DEFAULT_SPREAD).unwrap();
        assert!(p.passed() && p.spread() < 1.0 + 1e-3);
        let k = m.kappa_scaling_report(&[1.0, 10.0], &[1.0, 10.0, 1e3]).unwrap();
        assert_relative_eq!(k.note_value("c").unwrap(), 1.0, max_relative = 1e-9);
        let e = m.kappa_est_report(&log_grid(1e-2, 1e2, 5), DEFAULT_SPREAD).unwrap();
        assert!(e.spread() < 1.0 + 1e-3);
        let s = m.v_scaling_report(1.5, &rs, &[1.0, 10.0, 100.0], 1e-2);
        assert!(s.passed() && s.min_ratio > 0.99);
        assert!(m.sqrt_h_report(&rs, DEFAULT_SPREAD).unwrap().spread() < 1.0 + 1e-3);
        let id = m.kappa_identity_report(&[1e-2, 1.0, 1e2], 1e-3).unwrap();
        assert!(id.passed());
    }

    #[test]
    fn vigon_stable_ladder_tail() {
        // η(x) = c B(1.75, 0.75) x^{-0.75} / Γ(1.75) with c the Lévy density constant
        let s = stable(1.5, 0.0);
        let m = FluctuationModel::build(&s).unwrap();
        let c = s.measure().density(1.0);
        let beta = gamma_fn(1.75) * gamma_fn(0.75) / gamma_fn(2.5);
        for &x in &[0.01f64, 1.0, 30.0] {
            let want = c * beta / gamma_fn(1.75) * x.powf(-0.75);
            assert_relative_eq!(m.ladder_tail(x).unwrap(), want, max_relative = 1e-3);
        }
        let rep = m.vigon_report(&log_grid(1e-2, 1e2, 5), (0.9, 1.1)).unwrap().unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.note_value("delta").unwrap() < 1e-2);
    }

    #[test]
    fn brownian_is_drift_only() {
        let m = FluctuationModel::build(&ProcessSpec::new(Family::brownian()).unwrap()).unwrap();
        let rep = m.vigon_report(&[0.1, 1.0, 10.0], (0.9, 1.1)).unwrap().unwrap();
        assert!(rep.passed());
        assert_relative_eq!(rep.note_value("delta").unwrap(), 1.0, max_relative = 1e-6);
        let p = m.product_bound_report(&log_grid(1e-2, 1e2, 5), DEFAULT_SPREAD).unwrap();
        assert!(p.spread() < 1.0 + 1e-4);
    }

    #[test]
    fn spectrally_negative_v_linear() {
        let s = ProcessSpec::new(Family::BrownianJumps {
            sigma: 1.0,
            rate: 1.0,
            jumps: JumpLaw::Exponential { mean: -1.0 },
            mean: 0.0,
        })
        .unwrap();
        let m = FluctuationModel::build(&s).unwrap();
        assert!((m.v.slope(1e-4, 1e4) - 1.0).abs() < 1e-3);
        assert_eq!(m.ladder_tail(1.0).unwrap(), 0.0);
        let rep = m.vigon_report(&[0.1, 1.0, 10.0], (0.9, 1.1)).unwrap().unwrap();
        assert!(rep.passed());
    }

    #[test]
    fn one_sided_without_gaussian_skips_vigon() {
        let s = ProcessSpec::new(Family::Stable { alpha: 1.5, beta: -1.0, scale: 1.0 }).unwrap();
        let m = FluctuationModel::build(&s).unwrap();
        assert!(m.vigon_report(&[1.0], (0.9, 1.1)).unwrap().is_none());
    }
}

#[cfg(test)]
mod tempered_tests {
    use super::*;
    use crate::fluctuation::ConditionVerdict;
    use crate::model::{log_grid, Family, JumpLaw};

    #[test]
    fn zero_mean_cgmy_reports() {
        let s = ProcessSpec::new(Family::Cgmy {
            c_pos: 1.0,
            c_neg: 1.0,
            g: 2.0,
            m: 3.0,
            y_pos: 1.4,
            y_neg: 1.4,
            mean: 0.0,
        })
        .unwrap();
        let m = FluctuationModel::build(&s).unwrap();
        m.v.check_invariants(1e-4).unwrap();
        m.v_hat.check_invariants(1e-4).unwrap();
        let rs = log_grid(1e-2, 1e2, 9);
        assert!(m.product_bound_report(&rs, DEFAULT_SPREAD).unwrap().passed());
        let id = m.kappa_identity_report(&[1e-2, 1.0, 1e2], 1e-3).unwrap();
        assert!(id.passed());
        assert!(id.note_value("fourier_gap").unwrap() < 1e-4);
        assert!(m.kappa_est_report(&log_grid(1e-2, 1e2, 5), DEFAULT_SPREAD).unwrap().passed());
        let k = m.kappa_scaling_report(&[1.0, 10.0, 100.0], &[1.0, 10.0, 1e3]).unwrap();
        assert!(k.passed() && k.note_value("c").unwrap() <= 1.0 + 1e-9);
        // small scales look like a Y-stable process, large scales like Brownian motion
        let c = m.creeping().unwrap();
        assert_eq!(c.verdict, ConditionVerdict::Fails);
        assert!((c.v_slope - 0.7).abs() < 0.01);
        let l = m.linearity_large().unwrap();
        assert_eq!(l.verdict, ConditionVerdict::Holds);
        assert!((l.v_slope - 1.0).abs() < 0.01);
    }

    #[test]
    fn brownian_jumps_creeps_with_linear_v() {
        let s = ProcessSpec::new(Family::BrownianJumps {
            sigma: 1.0,
            rate: 1.0,
            jumps: JumpLaw::Exponential { mean: 1.0 },
            mean: 0.0,
        })
        .unwrap();
        let m = FluctuationModel::build(&s).unwrap();
        let c = m.creeping().unwrap();
        assert_eq!(c.verdict, ConditionVerdict::Holds);
        assert!((c.v_slope - 1.0).abs() < 0.01);
        assert!(m.product_bound_report(&log_grid(1e-2, 1e2, 9), DEFAULT_SPREAD).unwrap().passed());
        let vg = m.vigon_report(&log_grid(1e-2, 1e2, 5), (0.9, 1.1)).unwrap().unwrap();
        assert!(vg.passed());
        assert!(vg.note_value("delta").unwrap() > 0.0);
    }
}
