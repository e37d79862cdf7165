//! Scenario orchestration: configuration, the three-solution pipeline and its
//! checks, parameter sweeps, and deterministic export.

mod config;
mod scenario;
mod sweep;

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{fmt_float, table_to_csv, write_json, write_text};

pub use config::{LambdaMode, ScenarioConfig};
pub use scenario::{
    mountain_geometry, pass_endpoint, resolve_lambda, run_scenario, verify_main_theorem, Check, Distances, Report,
    DISTINCT_RTOL, GEOMETRY_SAMPLES, NONNEG_FLOOR,
};
pub use sweep::{sweep_lambda, BifurcationTable, SweepRow, SWEEP_HEADER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::InvalidArgument(format!("unknown format {s}"))),
        }
    }
}

/// Anything the harness can write as JSON or CSV.
pub trait Export: Serialize {
    fn to_csv(&self) -> Result<String>;
}

pub const REPORT_HEADER: [&str; 12] = [
    "branch",
    "converged",
    "iterations",
    "t_scale",
    "kinetic",
    "termA",
    "termB",
    "termC",
    "total",
    "residual",
    "sup_norm",
    "min_value",
];

pub const CHECKS_HEADER: [&str; 4] = ["name", "passed", "quantity", "value"];

impl Export for Report {
    /// One row per branch present.
    fn to_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = [("first", &self.first), ("pass", &self.pass), ("third", &self.third)]
            .into_iter()
            .filter_map(|(name, r)| {
                let r = r.as_ref()?;
                let e = &r.energy;
                Some(vec![
                    name.to_string(),
                    r.converged.to_string(),
                    r.iterations.to_string(),
                    fmt_float(r.t_scale),
                    fmt_float(e.kinetic),
                    fmt_float(e.term_a),
                    fmt_float(e.term_b),
                    fmt_float(e.term_c),
                    fmt_float(e.total),
                    fmt_float(e.residual),
                    fmt_float(r.solution.sup_norm()),
                    fmt_float(r.solution.min_value()),
                ])
            })
            .collect();
        table_to_csv(&REPORT_HEADER, &rows)
    }
}

impl Report {
    /// Checks in long form: one row per measured quantity, or a single row
    /// with empty quantity for a check with none.
    pub fn checks_csv(&self) -> Result<String> {
        let mut rows = Vec::new();
        for c in &self.checks {
            if c.values.is_empty() {
                rows.push(vec![c.name.clone(), c.passed.to_string(), String::new(), String::new()]);
            }
            for (k, v) in &c.values {
                rows.push(vec![c.name.clone(), c.passed.to_string(), k.clone(), fmt_float(*v)]);
            }
        }
        table_to_csv(&CHECKS_HEADER, &rows)
    }
}

impl Export for BifurcationTable {
    fn to_csv(&self) -> Result<String> {
        BifurcationTable::to_csv(self)
    }
}

/// Writes `item` to `path`; identical inputs give identical bytes.
pub fn export_report<T: Export>(item: &T, format: Format, path: &Path) -> Result<()> {
    match format {
        Format::Json => write_json(path, item),
        Format::Csv => write_text(path, &item.to_csv()?),
    }
}
