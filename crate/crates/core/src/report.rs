//! Verification reports: a JSON summary plus a per-sample table.
//!
//! Margins are stored as oriented slacks, so a report passes when its
//! smallest slack is at least `−tol` regardless of which way the underlying
//! inequality points.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::comparison_ode::CurvatureProfile;
use crate::error::{Error, Result};
use crate::spacetime::ModelDescriptor;

/// Location of the smallest slack.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Argmin {
    pub sample: usize,
    /// Plane, test vector or node index within the sample.
    pub item: usize,
    /// Radius (or level) at the sample.
    pub at: f64,
}

/// Rows of `f64` under named columns.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table { headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// CSV with shortest round-trip formatting of each value, so equal
    /// tables give identical bytes.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub experiment: String,
    pub model: ModelDescriptor,
    #[serde(rename = "G", skip_serializing_if = "Option::is_none")]
    pub g: Option<CurvatureProfile>,
    pub n_samples: usize,
    pub n_excluded: usize,
    /// Smallest oriented slack.
    pub min_margin: f64,
    pub argmin: Option<Argmin>,
    pub tol: f64,
    pub pass: bool,
    pub extra: BTreeMap<String, serde_json::Value>,
    #[serde(skip)]
    pub table: Table,
}

impl VerificationReport {
    /// Folds `(argmin, slack)` pairs into a report. `slacks` must be in a
    /// fixed order for the argmin to be reproducible; ties keep the first.
    #[allow(clippy::too_many_arguments)]
    pub fn from_slacks(
        experiment: &str,
        model: ModelDescriptor,
        g: Option<CurvatureProfile>,
        n_samples: usize,
        n_excluded: usize,
        slacks: impl IntoIterator<Item = (Argmin, f64)>,
        tol: f64,
        table: Table,
    ) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::Precondition(format!("{experiment}: no admissible samples ({n_excluded} excluded)")));
        }
        let mut min_margin = f64::INFINITY;
        let mut argmin = None;
        for (a, s) in slacks {
            if s < min_margin || s.is_nan() {
                min_margin = s;
                argmin = Some(a);
                if s.is_nan() {
                    break;
                }
            }
        }
        Ok(VerificationReport {
            experiment: experiment.to_string(),
            model,
            g,
            n_samples,
            n_excluded,
            min_margin,
            argmin,
            tol,
            pass: min_margin >= -tol,
            extra: BTreeMap::new(),
            table,
        })
    }

    pub fn with_extra(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.extra.insert(key.to_string(), v);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut json = self.to_json();
        json.push('\n');
        std::fs::write(dir.join(format!("{stem}.json")), json)?;
        let file = std::fs::File::create(dir.join(format!("{stem}.csv")))?;
        self.table.write_csv(std::io::BufWriter::new(file))
    }
}
