//! Claim-by-claim verification runs over configured processes.

pub mod claims;
pub mod config;
pub mod gates;
pub mod presets;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

pub use claims::{lookup, run_claim, ClaimDef, ClaimVerdict, Context, Outcome, REGISTRY, RESULTS};
pub use config::{ExperimentConfig, Grid, Grids, ProcessRef};
pub use gates::{Gate, Gates};
pub use presets::{preset, PRESETS};

use crate::error::{LevyError, Result};
use crate::fluctuation::ConditionVerdict;
use crate::model::{Family, ProcessSpec};
use crate::report::{Band, BoundReport, Verdict};

/// One claim as run: the checker outcome and its wall time.
#[derive(Clone, Debug)]
pub struct ClaimResult {
    pub id: String,
    pub outcome: Outcome,
    /// Seconds; written to `timings.csv`, never to `result.json`.
    pub wall_time: f64,
}

impl ClaimResult {
    pub fn verdict(&self) -> ClaimVerdict {
        self.outcome.verdict
    }

    pub fn reason(&self) -> Option<&str> {
        self.outcome.reason.as_deref()
    }

    /// A report by id, among deciding reports and diagnostics.
    pub fn report(&self, id: &str) -> Option<&BoundReport> {
        self.outcome.reports.iter().chain(&self.outcome.diagnostics).find(|r| r.id == id)
    }

    pub fn note(&self, key: &str) -> Option<f64> {
        self.outcome.notes.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    fn csv_name(&self, part: &str) -> String {
        if part == self.id {
            format!("{}.csv", self.id)
        } else {
            let short = part.strip_prefix(&format!("{}-", self.id)).unwrap_or(part);
            format!("{}.{short}.csv", self.id)
        }
    }

    fn summary(&self) -> ClaimSummary {
        let o = &self.outcome;
        let report = |r: &BoundReport, diagnostic: bool| ReportSummary {
            id: r.id.clone(),
            verdict: r.verdict.clone(),
            min_ratio: r.min_ratio,
            max_ratio: r.max_ratio,
            band: r.band,
            rows: r.rows.len(),
            diagnostic,
            notes: r.notes.iter().cloned().collect(),
            csv: self.csv_name(&r.id),
        };
        let mut reports: Vec<ReportSummary> = o.reports.iter().map(|r| report(r, false)).collect();
        reports.extend(o.diagnostics.iter().map(|r| report(r, true)));
        ClaimSummary {
            id: self.id.clone(),
            verdict: o.verdict,
            reason: o.reason.clone(),
            reports,
            conditions: o
                .conditions
                .iter()
                .map(|c| ConditionSummary {
                    id: c.id.clone(),
                    verdict: c.verdict,
                    increment_slope: c.increment_slope,
                    v_slope: c.v_slope,
                    tail_ratio: c.tail_ratio,
                    csv: self.csv_name(&c.id),
                })
                .collect(),
            notes: o.notes.iter().cloned().collect(),
        }
    }

    fn write_csv(&self, dir: &Path) -> Result<()> {
        for r in self.outcome.reports.iter().chain(&self.outcome.diagnostics) {
            r.write_csv(&dir.join(self.csv_name(&r.id)))?;
        }
        for c in &self.outcome.conditions {
            c.write_csv(&dir.join(self.csv_name(&c.id)))?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct ReportSummary {
    id: String,
    verdict: Verdict,
    min_ratio: f64,
    max_ratio: f64,
    band: Band,
    rows: usize,
    diagnostic: bool,
    notes: BTreeMap<String, f64>,
    csv: String,
}

#[derive(Serialize)]
struct ConditionSummary {
    id: String,
    verdict: ConditionVerdict,
    increment_slope: f64,
    v_slope: f64,
    tail_ratio: Option<f64>,
    csv: String,
}

#[derive(Serialize)]
struct ClaimSummary {
    id: String,
    verdict: ClaimVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    reports: Vec<ReportSummary>,
    conditions: Vec<ConditionSummary>,
    notes: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct Totals {
    pass: usize,
    fail: usize,
    skipped: usize,
}

#[derive(Serialize)]
struct ResultFile<'a> {
    process: &'a str,
    family: Option<&'a Family>,
    gates: &'a Gates,
    config: &'a ExperimentConfig,
    totals: Totals,
    claims: Vec<ClaimSummary>,
}

/// A finished run.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub spec: ProcessSpec,
    pub gates: Gates,
    pub results: Vec<ClaimResult>,
}

impl Experiment {
    /// Validates the config, evaluates the gates and runs every claim in order.
    pub fn run(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let mut seen = BTreeSet::new();
        for c in &config.claims {
            if !seen.insert(c) {
                return Err(LevyError::Config(format!("claim '{c}' listed twice")));
            }
        }
        let spec = config.process.build()?;
        let gates = Gates::evaluate(&spec)?;
        let ctx = Context::new(config, &spec, &gates);
        let mut results = Vec::with_capacity(config.claims.len());
        for id in &config.claims {
            let def = lookup(id).expect("validated claim id");
            let start = Instant::now();
            let outcome = run_claim(def, &ctx);
            results.push(ClaimResult {
                id: id.clone(),
                outcome,
                wall_time: start.elapsed().as_secs_f64(),
            });
        }
        Ok(Experiment {
            config: config.clone(),
            spec,
            gates,
            results,
        })
    }

    pub fn result(&self, id: &str) -> Option<&ClaimResult> {
        self.results.iter().find(|r| r.id == id)
    }

    pub fn count(&self, v: ClaimVerdict) -> usize {
        self.results.iter().filter(|r| r.verdict() == v).count()
    }

    /// 0 when every claim passed or was skipped, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.count(ClaimVerdict::Fail) > 0 {
            1
        } else {
            0
        }
    }

    /// The content of `result.json`.
    pub fn to_json(&self) -> Result<String> {
        let file = ResultFile {
            process: &self.spec.label,
            family: self.spec.family(),
            gates: &self.gates,
            config: &self.config,
            totals: Totals {
                pass: self.count(ClaimVerdict::Pass),
                fail: self.count(ClaimVerdict::Fail),
                skipped: self.count(ClaimVerdict::Skipped),
            },
            claims: self.results.iter().map(ClaimResult::summary).collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).map_err(|e| LevyError::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Writes `result.json`, one CSV per report and `timings.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("result.json"), self.to_json()?)?;
        for r in &self.results {
            r.write_csv(dir)?;
        }
        let mut w = csv::Writer::from_path(dir.join("timings.csv")).map_err(crate::report::csv_err)?;
        w.write_record(["claim", "seconds"]).map_err(crate::report::csv_err)?;
        for r in &self.results {
            w.write_record([r.id.clone(), format!("{:.3}", r.wall_time)])
                .map_err(crate::report::csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// One line per claim, for terminals.
    pub fn lines(&self) -> Vec<String> {
        self.results
            .iter()
            .map(|r| {
                let v = match r.verdict() {
                    ClaimVerdict::Pass => "PASS",
                    ClaimVerdict::Fail => "FAIL",
                    ClaimVerdict::Skipped => "SKIP",
                };
                match r.reason() {
                    Some(why) => format!("{v:4}  {:<18} {why}", r.id),
                    None => format!("{v:4}  {}", r.id),
                }
            })
            .collect()
    }
}

/// Runs `config` and writes its outputs to `config.output`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ClaimResult>> {
    run_experiment_into(config, &config.output)
}

/// As [`run_experiment`], writing to `dir` instead.
pub fn run_experiment_into(config: &ExperimentConfig, dir: &Path) -> Result<Vec<ClaimResult>> {
    let e = Experiment::run(config)?;
    e.write(dir)?;
    Ok(e.results)
}

/// The output directory of `config`, resolved against `base` when relative.
pub fn output_dir(config: &ExperimentConfig, base: &Path) -> PathBuf {
    if config.output.is_absolute() {
        config.output.clone()
    } else {
        base.join(&config.output)
    }
}
