//! Run reports: fixed-schema rows for plotting plus the list of every
//! inequality the run asserted, with margins.

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

/// One table cell. Numbers serialize to CSV with 17 significant digits so
/// equal runs produce byte-identical output.
#[derive(Clone, Debug)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Num(v) => write!(f, "{v:.16e}"),
            Cell::Text(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Int(v) => s.serialize_i64(*v),
            Cell::Num(v) => s.serialize_f64(*v),
            Cell::Text(v) => s.serialize_str(v),
        }
    }
}

/// One asserted inequality or agreement, with how much room it had.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    /// Signed slack; negative means violated.
    pub margin: f64,
    /// The tolerance the margin was held to.
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// A check that passes iff `margin >= -tolerance`.
    pub fn bound(name: impl Into<String>, margin: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            margin,
            tolerance,
            pass: margin >= -tolerance,
        }
    }

    /// A check that passes iff `|deviation| <= tolerance`.
    pub fn agreement(name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            margin: tolerance - deviation.abs(),
            tolerance,
            pass: deviation.abs() <= tolerance,
        }
    }
}

/// Everything one scenario run produced.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub checks: Vec<Check>,
    /// Grid-refinement diagnostics, where the scenario has a grid.
    pub convergence: Vec<Check>,
    pub tolerances: Vec<(String, f64)>,
    /// Wall time; excluded from the determinism contract.
    pub wall_ms: u128,
}

impl RunReport {
    pub fn new(scenario: &str, seed: u64, columns: Vec<&'static str>) -> Self {
        Self {
            scenario: scenario.to_string(),
            seed,
            columns,
            rows: Vec::new(),
            checks: Vec::new(),
            convergence: Vec::new(),
            tolerances: Vec::new(),
            wall_ms: 0,
        }
    }

    pub fn failed_checks(&self) -> usize {
        self.checks
            .iter()
            .chain(&self.convergence)
            .filter(|c| !c.pass)
            .count()
    }

    /// Deterministic CSV: header row, then data rows, `.` decimal separator,
    /// 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Full report as JSON; rows become objects keyed by column name.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Full<'a> {
            scenario: &'a str,
            seed: u64,
            tolerances: &'a [(String, f64)],
            checks: &'a [Check],
            convergence: &'a [Check],
            rows: Vec<RowObj<'a>>,
            wall_ms: u128,
        }
        struct RowObj<'a> {
            columns: &'a [&'static str],
            row: &'a [Cell],
        }
        impl Serialize for RowObj<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let mut map = s.serialize_map(Some(self.columns.len()))?;
                for (name, cell) in self.columns.iter().zip(self.row) {
                    map.serialize_entry(name, cell)?;
                }
                map.end()
            }
        }
        serde_json::to_value(Full {
            scenario: &self.scenario,
            seed: self.seed,
            tolerances: &self.tolerances,
            checks: &self.checks,
            convergence: &self.convergence,
            rows: self
                .rows
                .iter()
                .map(|row| RowObj {
                    columns: &self.columns,
                    row,
                })
                .collect(),
            wall_ms: self.wall_ms,
        })
        .expect("report serialization cannot fail")
    }
}
