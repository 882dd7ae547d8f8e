//! Grid reports comparing the two sides of an inequality.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Acceptance region for the ratios `lhs / rhs` of a report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Band {
    /// Every ratio lies in `[lower, upper]`.
    Interval { lower: f64, upper: f64 },
    /// `max / min` of the ratios stays below `factor`.
    Spread { factor: f64 },
    /// Every ratio is at most `upper`.
    Upper { upper: f64 },
    /// Every ratio is at least `lower` (and positive).
    Lower { lower: f64 },
    /// Ratios are finite.
    Finite,
}

impl Band {
    pub fn admits(&self, min: f64, max: f64) -> bool {
        if !(min.is_finite() && max.is_finite()) {
            return false;
        }
        match *self {
            Band::Interval { lower, upper } => min >= lower && max <= upper,
            Band::Spread { factor } => min > 0.0 && max / min < factor,
            Band::Upper { upper } => max <= upper,
            Band::Lower { lower } => min >= lower && min > 0.0,
            Band::Finite => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub inputs: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// One inequality evaluated over a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub id: String,
    pub input_names: Vec<String>,
    pub rows: Vec<BoundRow>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub band: Band,
    pub verdict: Verdict,
    /// Named scalar diagnostics (fitted constants, slopes, gate values).
    pub notes: Vec<(String, f64)>,
}

impl BoundReport {
    pub fn new(id: impl Into<String>, input_names: &[&str], band: Band) -> Self {
        BoundReport {
            id: id.into(),
            input_names: input_names.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            min_ratio: f64::NAN,
            max_ratio: f64::NAN,
            band,
            verdict: Verdict::Fail,
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, inputs: &[f64], lhs: f64, rhs: f64) {
        self.rows.push(BoundRow {
            inputs: inputs.to_vec(),
            lhs,
            rhs,
            ratio: lhs / rhs,
        });
    }

    pub fn note(&mut self, key: impl Into<String>, value: f64) {
        self.notes.push((key.into(), value));
    }

    pub fn note_value(&self, key: &str) -> Option<f64> {
        self.notes.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    /// Computes the ratio range and the verdict.
    pub fn finish(mut self) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for r in &self.rows {
            if r.ratio.is_nan() {
                lo = f64::NAN;
                hi = f64::NAN;
                break;
            }
            lo = lo.min(r.ratio);
            hi = hi.max(r.ratio);
        }
        self.min_ratio = lo;
        self.max_ratio = hi;
        self.verdict = if !self.rows.is_empty() && self.band.admits(lo, hi) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn spread(&self) -> f64 {
        self.max_ratio / self.min_ratio
    }

    /// Writes one row per grid point: the inputs, then `lhs,rhs,ratio`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        let mut header = self.input_names.clone();
        header.extend(["lhs", "rhs", "ratio"].map(String::from));
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.inputs.iter().map(|v| format!("{v:e}")).collect();
            rec.extend([r.lhs, r.rhs, r.ratio].iter().map(|v| format!("{v:e}")));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> crate::error::LevyError {
    crate::error::LevyError::Io(e.to_string())
}

/// Writes a numeric table with the given header.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:e}"))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
