//! The claim registry: one checker per verified statement.

use std::cell::OnceCell;

use super::config::ExperimentConfig;
use super::gates::{closing_scaling_index, log_tail_domination, Gate, Gates};
use crate::error::Result;
use crate::fluctuation::{ConditionReport, ConditionVerdict, FluctuationModel, DEFAULT_SPREAD};
use crate::model::{check_wlsc, log_grid, ProcessSpec};
use crate::montecarlo::{exit_time_with, exit_upper_report, pruitt_report, simulate_extrema, MCEstimate, Sampler};
use crate::quad::{integrate_log_scale, Tolerance};
use crate::report::{Band, BoundReport};
use crate::special::gamma_fn as gamma;
use crate::spectral::{ex3_report, im_re_domination};

/// Tolerance on the small- and large-scale slopes of `V` predicted by the
/// creeping and linearity conditions.
pub const SLOPE_TOLERANCE: f64 = 0.05;
/// Invariant tolerance of tabulated renewal functions.
pub const RENEWAL_TOLERANCE: f64 = 1e-4;

/// Everything a checker may look at. The fluctuation model is built on first use.
pub struct Context<'a> {
    pub config: &'a ExperimentConfig,
    pub spec: &'a ProcessSpec,
    pub gates: &'a Gates,
    model: OnceCell<FluctuationModel>,
}

impl<'a> Context<'a> {
    pub fn new(config: &'a ExperimentConfig, spec: &'a ProcessSpec, gates: &'a Gates) -> Self {
        Context {
            config,
            spec,
            gates,
            model: OnceCell::new(),
        }
    }

    pub fn model(&self) -> Result<&FluctuationModel> {
        if let Some(m) = self.model.get() {
            return Ok(m);
        }
        let m = FluctuationModel::build(self.spec)?;
        Ok(self.model.get_or_init(|| m))
    }

    fn band(&self, id: &str, default: Band) -> Band {
        self.config.band(id, default)
    }

    /// The spread factor of report `id`, honouring a `spread` override.
    fn spread(&self, id: &str) -> f64 {
        match self.band(id, Band::Spread { factor: DEFAULT_SPREAD }) {
            Band::Spread { factor } => factor,
            _ => DEFAULT_SPREAD,
        }
    }

    fn sampler(&self) -> Result<Sampler> {
        Sampler::new(self.spec, self.config.plan.eps)
    }

    fn exit_estimates(&self, xs: &[f64]) -> Result<Vec<MCEstimate>> {
        let s = self.sampler()?;
        let w = self.config.width;
        xs.iter()
            .map(|&x| exit_time_with(&s, self.spec, x, w, &self.config.plan))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClaimVerdict {
    Pass,
    Fail,
    Skipped,
}

/// What a checker found.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub verdict: ClaimVerdict,
    pub reason: Option<String>,
    /// Reports that decide the verdict.
    pub reports: Vec<BoundReport>,
    /// Reports written for inspection only.
    pub diagnostics: Vec<BoundReport>,
    pub conditions: Vec<ConditionReport>,
    pub notes: Vec<(String, f64)>,
}

impl Outcome {
    /// Passes iff every report passes.
    pub fn from_reports(reports: Vec<BoundReport>) -> Self {
        let ok = reports.iter().all(BoundReport::passed);
        Outcome {
            verdict: if ok { ClaimVerdict::Pass } else { ClaimVerdict::Fail },
            reason: None,
            reports,
            diagnostics: Vec::new(),
            conditions: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn skipped(reason: impl Into<String>) -> Self {
        Outcome {
            verdict: ClaimVerdict::Skipped,
            reason: Some(reason.into()),
            ..Outcome::from_reports(Vec::new())
        }
    }

    fn fail_if(mut self, failed: bool, reason: impl Into<String>) -> Self {
        if failed {
            self.verdict = ClaimVerdict::Fail;
            self.reason.get_or_insert(reason.into());
        }
        self
    }

    fn note(mut self, key: &str, value: f64) -> Self {
        self.notes.push((key.to_string(), value));
        self
    }
}

pub type Checker = fn(&Context) -> Result<Outcome>;

pub struct ClaimDef {
    pub id: &'static str,
    pub summary: &'static str,
    /// Entries of [`RESULTS`] this checker is responsible for.
    pub covers: &'static [&'static str],
    pub gates: &'static [Gate],
    pub check: Checker,
}

/// Results in scope, each verified by exactly one registered claim.
pub const RESULTS: [&str; 27] = [
    "characteristic exponent",
    "concentration function",
    "truncated drift",
    "scaling inequality of h",
    "weak lower scaling",
    "h vs sup Re psi sandwich",
    "ladder exponent formula",
    "kappa kappa-hat = z",
    "renewal function and its Laplace transform",
    "subadditivity of V",
    "upper bound on V V-hat",
    "scaling of kappa under positivity bounds",
    "weak scaling of kappa",
    "exit time upper bound",
    "product comparability with 1/h",
    "Pruitt bounds",
    "supremum and infimum distribution bounds",
    "kappa vs V at h-inverse",
    "weak lower scaling of V",
    "two-sided exit time estimate",
    "stable exit time formula",
    "symmetric renewal vs 1/sqrt(h)",
    "imaginary part dominated by real part",
    "integral of (1-cos) Re(1/psi)",
    "creeping criterion",
    "linearity of V at infinity",
    "closing example",
];

const BOTH: &[Gate] = &[Gate::Wlsc, Gate::ZeroMean];

pub const REGISTRY: [ClaimDef; 23] = [
    ClaimDef {
        id: "exponent",
        summary: "closed-form ψ agrees with quadrature of the Lévy–Khintchine integral",
        covers: &["characteristic exponent"],
        gates: &[],
        check: check_exponent,
    },
    ClaimDef {
        id: "h-sandwich",
        summary: "sup_{|ξ|≤1/r} Re ψ(ξ) / h(r) stays in [1/24, 2]",
        covers: &["concentration function", "h vs sup Re psi sandwich"],
        gates: &[],
        check: check_sandwich,
    },
    ClaimDef {
        id: "h-scaling",
        summary: "λ² h(λr) ≤ h(r) for λ ≤ 1",
        covers: &["scaling inequality of h"],
        gates: &[],
        check: check_h_scaling,
    },
    ClaimDef {
        id: "b-drift",
        summary: "|b_r| ≤ C r h(r)",
        covers: &["truncated drift"],
        gates: BOTH,
        check: check_drift,
    },
    ClaimDef {
        id: "wlsc",
        summary: "grid certificate of weak lower scaling for Re ψ",
        covers: &["weak lower scaling"],
        gates: &[],
        check: check_wlsc_claim,
    },
    ClaimDef {
        id: "kappa-identity",
        summary: "κ(z,0) κ̂(z,0) = z, and the two evaluation routes of κ agree",
        covers: &["ladder exponent formula", "kappa kappa-hat = z"],
        gates: &[],
        check: check_kappa_identity,
    },
    ClaimDef {
        id: "renewal",
        summary: "λ ∫ e^{-λx} V(x) dx = 1/κ(0,λ); V subadditive with V(λx) ≤ 2λ V(x)",
        covers: &["renewal function and its Laplace transform", "subadditivity of V"],
        gates: &[],
        check: check_renewal,
    },
    ClaimDef {
        id: "product-bound",
        summary: "h(r) V(r) V̂(r) bounded above and below",
        covers: &["upper bound on V V-hat", "product comparability with 1/h"],
        gates: BOTH,
        check: check_product_bound,
    },
    ClaimDef {
        id: "kappa-scaling",
        summary: "c^{-1} λ^{1-ρ} κ(z,0) ≤ κ(λz,0) ≤ c λ^ρ κ(z,0)",
        covers: &["scaling of kappa under positivity bounds", "weak scaling of kappa"],
        gates: &[Gate::Wlsc],
        check: check_kappa_scaling,
    },
    ClaimDef {
        id: "exit-upper",
        summary: "E^x τ_(0,R) ≤ V̂(x) V(R)",
        covers: &["exit time upper bound"],
        gates: &[],
        check: check_exit_upper,
    },
    ClaimDef {
        id: "pruitt",
        summary: "P(sup|X| ≥ r) ≤ C t (h(r) + |b_r|/r) and P(sup|X| < r) ≤ C/(t h(r))",
        covers: &["Pruitt bounds"],
        gates: &[],
        check: check_pruitt,
    },
    ClaimDef {
        id: "cdf-sup-inf",
        summary: "P(sup_{s≤t} X_s < x) ≈ min{1, V(x)/V(h^{-1}(1/t))}, likewise for the infimum",
        covers: &["supremum and infimum distribution bounds"],
        gates: BOTH,
        check: check_cdf,
    },
    ClaimDef {
        id: "kappa-est",
        summary: "κ(λ,0) ≈ 1/V(h^{-1}(λ))",
        covers: &["kappa vs V at h-inverse"],
        gates: BOTH,
        check: check_kappa_est,
    },
    ClaimDef {
        id: "v-scaling",
        summary: "V(λx) ≥ C λ^{α-1} V(x) for λ ≥ 1",
        covers: &["weak lower scaling of V"],
        gates: BOTH,
        check: check_v_scaling,
    },
    ClaimDef {
        id: "theorem-main",
        summary: "C V̂(x) V(R-x) ≤ E^x τ_(0,R) ≤ 2 V̂(x) V(R-x)",
        covers: &["two-sided exit time estimate"],
        gates: BOTH,
        check: check_theorem_main,
    },
    ClaimDef {
        id: "stable-exit",
        summary: "E^x τ_(0,R) = (R-x)^{αρ} x^{α(1-ρ)} / Γ(1+α) for unit-modulus stable exponents",
        covers: &["stable exit time formula"],
        gates: &[Gate::StrictlyStable],
        check: check_stable_exit,
    },
    ClaimDef {
        id: "v-sqrt-h",
        summary: "V(r) ≈ 1/√h(r) for symmetric processes",
        covers: &["symmetric renewal vs 1/sqrt(h)"],
        gates: &[Gate::Symmetric],
        check: check_sqrt_h,
    },
    ClaimDef {
        id: "im-re",
        summary: "|Im ψ(ξ)| ≤ C Re ψ(ξ)",
        covers: &["imaginary part dominated by real part"],
        gates: &[Gate::Wlsc],
        check: check_im_re,
    },
    ClaimDef {
        id: "ex3",
        summary: "∫ (1 - cos xy) Re(1/ψ(y)) dy ≈ 1/(|x| h(|x|))",
        covers: &["integral of (1-cos) Re(1/psi)"],
        gates: BOTH,
        check: check_ex3,
    },
    ClaimDef {
        id: "creeping",
        summary: "V(x) ≈ x near 0 iff ∫_0^1 ν(y,∞)/(y h(y)) dy < ∞",
        covers: &["creeping criterion"],
        gates: BOTH,
        check: check_creeping,
    },
    ClaimDef {
        id: "linearity-large",
        summary: "V(x) ≈ x at infinity iff ∫_1^∞ ν(y,∞)/(y h(y)) dy < ∞, under tail domination",
        covers: &["linearity of V at infinity"],
        gates: BOTH,
        check: check_linearity,
    },
    ClaimDef {
        id: "vigon-consistency",
        summary: "κ(0,λ) rebuilt from the ladder height Lévy measure and drift",
        covers: &[],
        gates: &[],
        check: check_vigon,
    },
    ClaimDef {
        id: "closing-example",
        summary: "E^x τ_(0,R) ≈ x / ((R-x) h(R-x)) under logarithmic tail domination",
        covers: &["closing example"],
        gates: BOTH,
        check: check_closing,
    },
];

pub fn lookup(id: &str) -> Option<&'static ClaimDef> {
    REGISTRY.iter().find(|c| c.id == id)
}

/// Runs `def` under its gates; checker errors become failures with the message.
pub fn run_claim(def: &ClaimDef, ctx: &Context) -> Outcome {
    if let Some(g) = ctx.gates.first_failure(def.gates) {
        return Outcome::skipped(g.failure());
    }
    match (def.check)(ctx) {
        Ok(o) => o,
        Err(e) => Outcome::from_reports(Vec::new()).fail_if(true, format!("error: {e}")),
    }
}

fn symmetric_grid(g: &[f64]) -> Vec<f64> {
    g.iter().flat_map(|&x| [-x.abs(), x.abs()]).collect()
}

fn check_exponent(ctx: &Context) -> Result<Outcome> {
    let xis = symmetric_grid(&ctx.config.grids.xi.points());
    let quad = crate::parallel::try_map(&xis, |&xi| ctx.spec.psi_quadrature(xi))?;
    let mut rep = BoundReport::new(
        "exponent",
        &["xi", "re_psi", "im_psi"],
        ctx.band("exponent", Band::Upper { upper: 1e-6 }),
    );
    let mut min_re = f64::INFINITY;
    for (&xi, q) in xis.iter().zip(quad) {
        let p = ctx.spec.psi(xi);
        min_re = min_re.min(q.re);
        rep.push(&[xi, p.re, p.im], (q - p).norm(), p.norm());
    }
    let mut rep = rep.finish();
    rep.note("min_re_psi", min_re);
    Ok(Outcome::from_reports(vec![rep]).fail_if(min_re < 0.0, "negative Re ψ"))
}

fn check_sandwich(ctx: &Context) -> Result<Outcome> {
    let mut rep = ctx.model_free_conc().sandwich_report(&ctx.config.grids.r.points())?;
    rep.band = ctx.band("h-sandwich", rep.band);
    Ok(Outcome::from_reports(vec![rep.finish()]))
}

fn check_h_scaling(ctx: &Context) -> Result<Outcome> {
    let rep = ctx
        .model_free_conc()
        .scaling_report(&ctx.config.grids.r.points(), &[1e-3, 1e-2, 0.1, 0.5, 1.0])?;
    Ok(Outcome::from_reports(vec![rep]))
}

fn check_drift(ctx: &Context) -> Result<Outcome> {
    let mut rep = ctx.model_free_conc().drift_report(&ctx.config.grids.r.points())?;
    rep.band = ctx.band("b-drift", rep.band);
    Ok(Outcome::from_reports(vec![rep.finish()]))
}

impl Context<'_> {
    fn model_free_conc(&self) -> crate::concentration::ConcentrationProfile {
        crate::concentration::ConcentrationProfile::new(self.spec)
    }
}

fn check_wlsc_claim(ctx: &Context) -> Result<Outcome> {
    let grid = log_grid(super::gates::WLSC_RANGE.0, super::gates::WLSC_RANGE.1, super::gates::WLSC_POINTS);
    let alpha = ctx.gates.wlsc_index;
    let cert = check_wlsc(|x| ctx.spec.re_psi(x), alpha, &grid)?;
    let mut rep = BoundReport::new("wlsc", &["alpha"], Band::Lower { lower: 1.0 - 1e-12 });
    rep.push(&[alpha], cert.worst_ratio, cert.theta);
    let mut rep = rep.finish();
    rep.note("alpha", alpha);
    rep.note("theta", cert.theta);
    Ok(Outcome::from_reports(vec![rep]).note("alpha_exceeds_one", if alpha > 1.0 { 1.0 } else { 0.0 }))
}

fn check_kappa_identity(ctx: &Context) -> Result<Outcome> {
    let tol = match ctx.band("kappa-identity", Band::Interval { lower: 1.0 - 1e-3, upper: 1.0 + 1e-3 }) {
        Band::Interval { upper, .. } => upper - 1.0,
        _ => 1e-3,
    };
    let rep = ctx.model()?.kappa_identity_report(&ctx.config.grids.z.points(), tol)?;
    let gap = rep.note_value("fourier_gap").unwrap_or(f64::NAN);
    Ok(Outcome::from_reports(vec![rep]).fail_if(!(gap <= tol), format!("evaluation routes of κ differ by {gap:e}")))
}

/// `λ ∫_0^∞ e^{-λx} V(x) dx = ∫_0^∞ e^{-u} V(u/λ) du`.
fn laplace_of(v: &crate::fluctuation::RenewalFunction, lam: f64) -> Result<f64> {
    Ok(integrate_log_scale(
        |u: f64| (-u).exp() * v.eval(u / lam),
        1e-14,
        60.0,
        &[1.0],
        Tolerance::new(1e-300, 1e-10),
    )?
    .value)
}

fn check_renewal(ctx: &Context) -> Result<Outcome> {
    let m = ctx.model()?;
    let dual = m.ladder.dual();
    let lambdas = ctx.config.grids.lambda.points();
    let tol = RENEWAL_TOLERANCE;
    let mut lap = BoundReport::new(
        "renewal-laplace",
        &["lambda", "side"],
        ctx.band("renewal-laplace", Band::Interval { lower: 1.0 - 1e-3, upper: 1.0 + 1e-3 }),
    );
    for &l in &lambdas {
        lap.push(&[l, 1.0], laplace_of(&m.v, l)?, 1.0 / m.ladder.kappa_space(l)?);
        lap.push(&[l, -1.0], laplace_of(&m.v_hat, l)?, 1.0 / dual.kappa_space(l)?);
    }
    let mut inv = BoundReport::new(
        "renewal-invariants",
        &["side", "subadditivity_excess", "growth_excess"],
        Band::Upper { upper: tol },
    );
    for (side, v) in [(1.0, &m.v), (-1.0, &m.v_hat)] {
        let (s, g) = (v.subadditivity_excess(), v.growth_excess());
        inv.push(&[side, s, g], s.max(g - 1.0).max(0.0), 1.0);
    }
    let mut inv = inv.finish();
    inv.note("rearranged", if m.v.rearranged || m.v_hat.rearranged { 1.0 } else { 0.0 });
    if let Some(gap) = m.stable_oracle_gap() {
        inv.note("stable_oracle_gap", gap);
    }
    Ok(Outcome::from_reports(vec![lap.finish(), inv]))
}

fn check_product_bound(ctx: &Context) -> Result<Outcome> {
    let rep = ctx
        .model()?
        .product_bound_report(&ctx.config.grids.r.points(), ctx.spread("product-bound"))?;
    Ok(Outcome::from_reports(vec![rep]))
}

fn check_kappa_scaling(ctx: &Context) -> Result<Outcome> {
    let mut rep = ctx
        .model()?
        .kappa_scaling_report(&ctx.config.grids.z.points(), &[1.0, 10.0, 100.0, 1000.0])?;
    rep.band = ctx.band("kappa-scaling", rep.band);
    let rep = rep.finish();
    Ok(Outcome::from_reports(vec![rep]))
}

fn check_exit_upper(ctx: &Context) -> Result<Outcome> {
    let m = ctx.model()?;
    let mut rep = exit_upper_report(ctx.spec, &ctx.config.plan, ctx.config.width, &ctx.config.starts(), &m.v, &m.v_hat)?;
    rep.band = ctx.band("exit-upper", rep.band);
    let rep = rep.finish();
    Ok(Outcome::from_reports(vec![rep]))
}

fn check_pruitt(ctx: &Context) -> Result<Outcome> {
    let g = &ctx.config.grids;
    let rep = pruitt_report(ctx.spec, &ctx.config.plan, &g.t.points(), &g.r.points())?;
    Ok(Outcome::from_reports(vec![rep]))
}

fn check_cdf(ctx: &Context) -> Result<Outcome> {
    let m = ctx.model()?;
    let ts = ctx.config.grids.t.points();
    let levels = ctx.config.grids.level.points();
    let ex = simulate_extrema(ctx.spec, &ts, &ctx.config.plan)?;
    let n = ctx.config.plan.n_paths as f64;
    let mut band_rep = BoundReport::new(
        "cdf-sup-inf",
        &["t", "x", "side", "std_error"],
        ctx.band("cdf-sup-inf", Band::Spread { factor: DEFAULT_SPREAD }),
    );
    let mut sat = BoundReport::new(
        "cdf-saturation",
        &["t", "x", "side", "estimate"],
        Band::Upper { upper: 1.0 },
    );
    for &t in &ts {
        let scale = m.conc.h_inv(1.0 / t)?;
        for (side, v) in [(1.0, &m.v), (-1.0, &m.v_hat)] {
            let cdf = |x: f64| if side > 0.0 { ex.sup_cdf(t, x) } else { ex.inf_cdf(t, x) };
            for &x in &levels {
                let p = cdf(x)?;
                band_rep.push(&[t, x, side, p.std_error], p.mean, (v.eval(x) / v.eval(scale)).min(1.0));
            }
            // beyond ten times the natural scale the bound is 1; so must the estimate be, within 3 se
            for k in [10.0, 30.0] {
                let x = k * scale;
                let p = cdf(x)?;
                sat.push(&[t, x, side, p.mean], 1.0 - p.mean, 3.0 * p.std_error + 0.5 / n);
            }
        }
    }
    let band_rep = band_rep.finish();
    let sat = sat.finish();
    let mut o = Outcome::from_reports(vec![band_rep, sat]);
    if o.verdict == ClaimVerdict::Fail {
        let failed: Vec<&str> = o.reports.iter().filter(|r| !r.passed()).map(|r| r.id.as_str()).collect();
        o.reason = Some(format!("failed: {}", failed.join(", ")));
    }
    Ok(o)
}

fn check_kappa_est(ctx: &Context) -> Result<Outcome> {
    let rep = ctx
        .model()?
        .kappa_est_report(&ctx.config.grids.lambda.points(), ctx.spread("kappa-est"))?;
    Ok(Outcome::from_reports(vec![rep]))
}

fn check_v_scaling(ctx: &Context) -> Result<Outcome> {
    let floor = match ctx.band("v-scaling", Band::Lower { lower: 0.01 }) {
        Band::Lower { lower } => lower,
        _ => 0.01,
    };
    let rep = ctx.model()?.v_scaling_report(
        ctx.gates.wlsc_index,
        &ctx.config.grids.r.points(),
        &[1.0, 10.0, 100.0],
        floor,
    );
    Ok(Outcome::from_reports(vec![rep]))
}

fn check_theorem_main(ctx: &Context) -> Result<Outcome> {
    let m = ctx.model()?;
    let w = ctx.config.width;
    let xs = ctx.config.starts();
    let est = ctx.exit_estimates(&xs)?;
    let mut upper = BoundReport::new(
        "theorem-main-upper",
        &["x", "mean", "std_error", "censored_fraction"],
        ctx.band("theorem-main-upper", Band::Upper { upper: 1.0 }),
    );
    let mut lower = BoundReport::new(
        "theorem-main-lower",
        &["x", "mean", "std_error", "censored_fraction"],
        ctx.band("theorem-main-lower", Band::Lower { lower: 0.01 }),
    );
    for (&x, e) in xs.iter().zip(&est) {
        let prod = m.v_hat.eval(x) * m.v.eval(w - x);
        let inputs = [x, e.mean, e.std_error, e.censored_fraction];
        upper.push(&inputs, e.mean + 3.0 * e.std_error, 2.0 * prod);
        lower.push(&inputs, e.mean, prod);
    }
    let biased = est.iter().any(|e| e.biased_low);
    let mut lower = lower.finish();
    lower.note("spread", lower.spread());
    Ok(Outcome::from_reports(vec![upper.finish(), lower]).note("biased_low", if biased { 1.0 } else { 0.0 }))
}

/// `(R-x)^{αρ} x^{α(1-ρ)} / (Γ(1+α) |ψ(1)|)`, the mean exit time of a strictly
/// stable process from `(0, R)`.
pub fn stable_exit_mean(spec: &ProcessSpec, x: f64, width: f64) -> Option<f64> {
    let (alpha, _, _) = spec.stable_parameters()?;
    let rho = spec.stable_positivity()?;
    let modulus = spec.psi(1.0).norm();
    Some((width - x).powf(alpha * rho) * x.powf(alpha * (1.0 - rho)) / (gamma(1.0 + alpha) * modulus))
}

fn check_stable_exit(ctx: &Context) -> Result<Outcome> {
    let xs = ctx.config.starts();
    let est = ctx.exit_estimates(&xs)?;
    let mut rep = BoundReport::new(
        "stable-exit",
        &["x", "mean", "std_error", "censored_fraction"],
        ctx.band("stable-exit", Band::Interval { lower: 0.95, upper: 1.05 }),
    );
    for (&x, e) in xs.iter().zip(&est) {
        let exact = stable_exit_mean(ctx.spec, x, ctx.config.width).expect("gated on stability");
        rep.push(&[x, e.mean, e.std_error, e.censored_fraction], e.mean, exact);
    }
    Ok(Outcome::from_reports(vec![rep.finish()]))
}

fn check_sqrt_h(ctx: &Context) -> Result<Outcome> {
    let rep = ctx
        .model()?
        .sqrt_h_report(&ctx.config.grids.r.points(), ctx.spread("v-sqrt-h"))?;
    Ok(Outcome::from_reports(vec![rep]))
}

fn check_im_re(ctx: &Context) -> Result<Outcome> {
    let mut rep = im_re_domination(ctx.spec, &ctx.config.grids.xi.points());
    rep.band = ctx.band("im-re", rep.band);
    let rep = rep.finish();
    Ok(Outcome::from_reports(vec![rep]))
}

fn check_ex3(ctx: &Context) -> Result<Outcome> {
    let band = ctx.band("ex3", Band::Spread { factor: DEFAULT_SPREAD });
    let rep = ex3_report(ctx.spec, &ctx.config.grids.r.points(), band)?;
    Ok(Outcome::from_reports(vec![rep]))
}

/// Pass when the verdict of the integral condition and the fitted slope of `V`
/// tell the same story.
fn condition_outcome(c: ConditionReport, what: &str) -> Outcome {
    let linear = (c.v_slope - 1.0).abs() <= SLOPE_TOLERANCE;
    let (verdict, reason) = match c.verdict {
        ConditionVerdict::Holds if linear => (ClaimVerdict::Pass, None),
        ConditionVerdict::Holds => (
            ClaimVerdict::Fail,
            Some(format!("integral converges but V slope is {:.3}", c.v_slope)),
        ),
        ConditionVerdict::Fails if c.v_slope < 1.0 - SLOPE_TOLERANCE => (ClaimVerdict::Pass, None),
        ConditionVerdict::Fails => (
            ClaimVerdict::Fail,
            Some(format!("integral diverges but V slope is {:.3}", c.v_slope)),
        ),
        ConditionVerdict::Inconclusive => (
            ClaimVerdict::Skipped,
            Some(format!("{what} integral inconclusive on the dyadic grid")),
        ),
        ConditionVerdict::HypothesisNotMet => (
            ClaimVerdict::Skipped,
            Some("tail-domination hypothesis ν(z,∞) ≤ Cν(-∞,-z) not met".into()),
        ),
    };
    let notes = vec![
        ("increment_slope".to_string(), c.increment_slope),
        ("v_slope".to_string(), c.v_slope),
    ];
    Outcome {
        verdict,
        reason,
        reports: Vec::new(),
        diagnostics: Vec::new(),
        conditions: vec![c],
        notes,
    }
}

fn check_creeping(ctx: &Context) -> Result<Outcome> {
    Ok(condition_outcome(ctx.model()?.creeping()?, "creeping"))
}

fn check_linearity(ctx: &Context) -> Result<Outcome> {
    Ok(condition_outcome(ctx.model()?.linearity_large()?, "linearity"))
}

fn check_vigon(ctx: &Context) -> Result<Outcome> {
    let (lo, hi) = match ctx.band("vigon-consistency", Band::Interval { lower: 0.9, upper: 1.1 }) {
        Band::Interval { lower, upper } => (lower, upper),
        _ => (0.9, 1.1),
    };
    Ok(match ctx.model()?.vigon_report(&ctx.config.grids.lambda.points(), (lo, hi))? {
        Some(rep) => Outcome::from_reports(vec![rep]),
        None => Outcome::skipped("no upward jumps and no Gaussian part: the ladder height is a pure drift"),
    })
}

/// Starting points of the closing example, as fractions of the width.
pub const CLOSING_STARTS: [f64; 7] = [0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95];
/// Starting points for the slope fit at the lower end.
pub const CLOSING_SLOPE_STARTS: [f64; 3] = [0.0125, 0.025, 0.05];
pub const CLOSING_SLOPE_TOLERANCE: f64 = 0.1;

fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    crate::fluctuation::least_squares_slope(&pts)
}

fn check_closing(ctx: &Context) -> Result<Outcome> {
    if ctx.spec.measure().lower_tail(1e-9) == 0.0 {
        return Ok(Outcome::skipped("no downward jumps, so the lower tail cannot dominate"));
    }
    let beta = ctx.config.closing_beta;
    let domination = log_tail_domination(ctx.spec, beta);
    if !domination.is_finite() {
        return Ok(Outcome::skipped(format!(
            "tail-domination hypothesis ν(r,∞) ≤ cν(-∞,-r)/ln(r+1/r)^{{1+β}} fails for β = {beta}"
        )));
    }
    let index = match closing_scaling_index(ctx.spec) {
        Ok(i) => i,
        Err(e) => return Ok(Outcome::skipped(format!("scaling hypothesis not checkable: {e}"))),
    };
    if index <= 1.0 {
        return Ok(Outcome::skipped(format!(
            "x²∫_0^{{1/x}} u ν(-∞,-u) du has lower scaling index {index:.3} ≤ 1"
        )));
    }
    let m = ctx.model()?;
    let w = ctx.config.width;
    let spread = ctx.spread("closing-example");

    let mut lin = BoundReport::new("closing-v-linear", &["r"], Band::Spread { factor: spread });
    for &r in &ctx.config.grids.r.points() {
        lin.push(&[r], m.v.eval(r), r);
    }

    let xs: Vec<f64> = CLOSING_STARTS.iter().map(|f| f * w).collect();
    let est = ctx.exit_estimates(&xs)?;
    let h = |r: f64| m.conc.h(r);
    let names = ["x", "mean", "std_error", "censored_fraction"];
    let mut main = BoundReport::new("closing-example", &names, Band::Spread { factor: spread });
    let mut mirrored = BoundReport::new("closing-example-mirrored", &names, Band::Spread { factor: spread });
    for (&x, e) in xs.iter().zip(&est) {
        let inputs = [x, e.mean, e.std_error, e.censored_fraction];
        main.push(&inputs, e.mean, x / ((w - x) * h(w - x)?));
        mirrored.push(&inputs, e.mean, (w - x) / (x * h(x)?));
    }

    let low: Vec<f64> = CLOSING_SLOPE_STARTS.iter().map(|f| f * w).collect();
    let high: Vec<f64> = low.iter().map(|x| w - x).collect();
    let low_est = ctx.exit_estimates(&low)?;
    let high_est = ctx.exit_estimates(&high)?;
    let mut slope = BoundReport::new("closing-example-slope", &["x", "std_error", "end"], Band::Finite);
    for (&x, e) in low.iter().zip(&low_est) {
        slope.push(&[x, e.std_error, 0.0], e.mean, x);
    }
    for (&x, e) in high.iter().zip(&high_est) {
        slope.push(&[x, e.std_error, 1.0], e.mean, w - x);
    }
    let means = |v: &[MCEstimate]| v.iter().map(|e| e.mean).collect::<Vec<_>>();
    let slope_low = log_slope(&low, &means(&low_est));
    let dist: Vec<f64> = high.iter().map(|x| w - x).collect();
    let slope_high = log_slope(&dist, &means(&high_est));
    let mut slope = slope.finish();
    slope.note("slope_at_0", slope_low);
    slope.note("slope_at_R", slope_high);

    let mut o = Outcome::from_reports(vec![lin.finish(), main.finish()]);
    o.diagnostics = vec![mirrored.finish(), slope];
    let o = o
        .note("tail_domination", domination)
        .note("scaling_index", index)
        .note("slope_at_0", slope_low)
        .note("slope_at_R", slope_high);
    let bad_slope = (slope_low - 1.0).abs() > CLOSING_SLOPE_TOLERANCE;
    let failed: Vec<String> = o.reports.iter().filter(|r| !r.passed()).map(|r| r.id.clone()).collect();
    let reason = if failed.is_empty() {
        format!("exit time vanishes like x^{slope_low:.3} at 0, not linearly")
    } else {
        format!("failed: {}", failed.join(", "))
    };
    Ok(o.fail_if(bad_slope || !failed.is_empty(), reason))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn registry_is_complete_and_unique() {
        let ids: BTreeSet<&str> = REGISTRY.iter().map(|c| c.id).collect();
        assert_eq!(ids.len(), REGISTRY.len());
        for r in RESULTS {
            let n = REGISTRY.iter().filter(|c| c.covers.contains(&r)).count();
            assert_eq!(n, 1, "result '{r}' is covered by {n} checkers");
        }
        for c in &REGISTRY {
            for r in c.covers {
                assert!(RESULTS.contains(r), "{} covers unknown result '{r}'", c.id);
            }
        }
        for id in [
            "theorem-main",
            "cdf-sup-inf",
            "exit-upper",
            "product-bound",
            "kappa-identity",
            "kappa-scaling",
            "kappa-est",
            "v-scaling",
            "pruitt",
            "im-re",
            "ex3",
            "creeping",
            "linearity-large",
            "vigon-consistency",
        ] {
            assert!(lookup(id).is_some(), "{id}");
        }
    }

    #[test]
    fn stable_exit_formula_reduces_to_brownian() {
        let b = crate::harness::presets::preset("brownian").unwrap();
        for &x in &[0.1, 0.5, 0.8] {
            let want = x * (1.0 - x) / 2.0;
            assert!((stable_exit_mean(&b, x, 1.0).unwrap() - want).abs() < 1e-14);
        }
        let s = crate::harness::presets::preset("symmetric-stable-1.5").unwrap();
        let v = stable_exit_mean(&s, 0.5, 1.0).unwrap();
        assert!((v - 0.25f64.powf(0.75) / gamma(2.5)).abs() < 1e-12);
    }

    #[test]
    fn condition_outcomes() {
        let mk = |verdict, v_slope| ConditionReport {
            id: "creeping".into(),
            verdict,
            partial_integrals: vec![],
            increment_slope: 0.0,
            v_slope,
            tail_ratio: None,
        };
        assert_eq!(condition_outcome(mk(ConditionVerdict::Holds, 1.01), "c").verdict, ClaimVerdict::Pass);
        assert_eq!(condition_outcome(mk(ConditionVerdict::Holds, 0.8), "c").verdict, ClaimVerdict::Fail);
        assert_eq!(condition_outcome(mk(ConditionVerdict::Fails, 0.75), "c").verdict, ClaimVerdict::Pass);
        assert_eq!(condition_outcome(mk(ConditionVerdict::Fails, 1.0), "c").verdict, ClaimVerdict::Fail);
        let o = condition_outcome(mk(ConditionVerdict::HypothesisNotMet, 1.0), "c");
        assert_eq!(o.verdict, ClaimVerdict::Skipped);
        assert!(o.reason.unwrap().contains("tail-domination"));
    }
}
