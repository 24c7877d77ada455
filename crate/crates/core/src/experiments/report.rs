//! Structured experiment output: JSON, CSV per table, and an SVG scatter.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;
use crate::measure::DiscreteMeasure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Observation,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Observation => "OBSERVATION",
        })
    }
}

/// One checked or observed quantity. `margin` is positive when the check
/// passed with room to spare and negative by the amount it was missed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    pub value: f64,
    pub tolerance: f64,
    pub margin: f64,
    pub sample_size: usize,
}

impl Verdict {
    fn from_margin(name: impl Into<String>, value: f64, tolerance: f64, margin: f64, sample_size: usize) -> Self {
        let status = if margin >= 0.0 { Status::Pass } else { Status::Fail };
        Verdict { name: name.into(), status, value, tolerance, margin, sample_size }
    }

    /// `|value − target| ≤ tolerance`.
    pub fn within(name: impl Into<String>, value: f64, target: f64, tolerance: f64, sample_size: usize) -> Self {
        let margin = if value.is_finite() { tolerance - (value - target).abs() } else { f64::NEG_INFINITY };
        Self::from_margin(name, value, tolerance, margin, sample_size)
    }

    /// `value ≤ bound`; the bound is reported as the tolerance.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64, sample_size: usize) -> Self {
        let margin = if value.is_nan() { f64::NEG_INFINITY } else { bound - value };
        Self::from_margin(name, value, bound, margin, sample_size)
    }

    /// `value ≥ bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64, sample_size: usize) -> Self {
        let margin = if value.is_nan() { f64::NEG_INFINITY } else { value - bound };
        Self::from_margin(name, value, bound, margin, sample_size)
    }

    /// A yes/no structural check, reported as value 1 or 0.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Self::from_margin(name, v, 0.0, if ok { 0.0 } else { -1.0 }, 0)
    }

    pub fn observation(name: impl Into<String>, value: f64, sample_size: usize) -> Self {
        Verdict { name: name.into(), status: Status::Observation, value, tolerance: 0.0, margin: 0.0, sample_size }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} value={} tolerance={}", self.status, self.name, self.value, self.tolerance)?;
        if self.status != Status::Observation {
            write!(f, " margin={}", self.margin)?;
        }
        if self.sample_size > 0 {
            write!(f, " samples={}", self.sample_size)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell_text))?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub experiment: String,
    pub config: Value,
    pub tables: Vec<Table>,
    pub verdicts: Vec<Verdict>,
    pub seed: u64,
    pub version: &'static str,
    /// Points for the SVG scatter; never serialized.
    #[serde(skip)]
    pub cloud: Option<DiscreteMeasure>,
}

impl Report {
    pub fn new(experiment: impl Into<String>, config: &impl Serialize, seed: u64) -> Self {
        Report {
            experiment: experiment.into(),
            config: serde_json::to_value(config).expect("config serializes"),
            tables: Vec::new(),
            verdicts: Vec::new(),
            seed,
            version: env!("CARGO_PKG_VERSION"),
            cloud: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(Verdict::passed)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Moves the tables and verdicts of `other` into `self` under `prefix`.
    pub fn absorb(&mut self, other: Report, prefix: &str) {
        self.tables.extend(other.tables.into_iter().map(|mut t| {
            t.name = format!("{prefix}_{}", t.name);
            t
        }));
        self.verdicts.extend(other.verdicts.into_iter().map(|mut v| {
            v.name = format!("{prefix}_{}", v.name);
            v
        }));
        if self.cloud.is_none() {
            self.cloud = other.cloud;
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Tables as CSV blocks headed by `# name`, then one line per verdict.
    pub fn to_text(&self) -> Result<String> {
        let mut s = String::new();
        for t in &self.tables {
            writeln!(s, "# {}", t.name).unwrap();
            s.push_str(&t.to_csv()?);
            s.push('\n');
        }
        for v in &self.verdicts {
            writeln!(s, "{v}").unwrap();
        }
        Ok(s)
    }

    /// Writes `<dir>/<experiment>_<table>.csv` for every table.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for t in &self.tables {
            let name = format!("{}_{}.csv", self.experiment, t.name).replace(['/', ' '], "_");
            std::fs::write(dir.join(name), t.to_csv()?)?;
        }
        Ok(())
    }
}

/// Maximum number of atoms drawn in an SVG scatter.
pub const SVG_POINT_LIMIT: usize = 50_000;

/// Scatter of the first atoms of `theta`; one-dimensional measures are drawn
/// along a horizontal line.
pub fn svg_scatter(theta: &DiscreteMeasure) -> String {
    let n = theta.len().min(SVG_POINT_LIMIT);
    let d = theta.dim();
    let xy = |i: usize| {
        let p = theta.point(i);
        (p[0], if d > 1 { p[1] } else { 0.0 })
    };
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let (x, y) = xy(i);
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let size = 800.0;
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#)
        .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<g fill="black" fill-opacity="0.4">"#).unwrap();
    for i in 0..n {
        let (x, y) = xy(i);
        let px = 10.0 + (x - x0) / span * (size - 20.0);
        let py = size - 10.0 - (y - y0) / span * (size - 20.0);
        writeln!(s, r#"<circle cx="{px:.2}" cy="{py:.2}" r="0.6"/>"#).unwrap();
    }
    s.push_str("</g>\n</svg>\n");
    s
}
