//! Self-describing tabular output (CSV and JSON) and comparison against a
//! stored reference.
//!
//! CSV layout: one `# key: <json>` line per metadata entry, then a header
//! row and data rows. Missing values are empty fields. The JSON layout is
//! `{"metadata": {...}, "columns": [...], "nodes": [{column: value, ...}, ...]}`
//! with `null` for missing values.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::emission::{CorrelationMap, IntensityMap};
use crate::error::{Error, Result};
use crate::geometry::{build_angular_grid, AngularGrid};
use crate::numeric::NeumaierSum;

pub const UNITS: &str = "lengths in λ_L, rates in Γ";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Parse(format!("unknown format '{other}' (expected csv or json)"))),
        }
    }
}

impl Format {
    pub fn name(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub metadata: Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Dataset {
    pub fn new(columns: &[&str]) -> Self {
        Dataset {
            metadata: Map::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.metadata.insert(key.to_string(), value.into());
    }

    pub fn push_row(&mut self, row: Vec<Option<f64>>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match columns");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// `theta,phi,value` rows from an intensity map, with grid metadata.
    pub fn from_intensity_map(map: &IntensityMap) -> Self {
        let mut ds = Dataset::new(&["theta", "phi", "value"]);
        set_grid(&mut ds, &map.grid);
        ds.set("integral", map.integral);
        for (d, v) in map.grid.nodes().iter().zip(&map.values) {
            ds.push_row(vec![Some(d.theta()), Some(d.phi()), Some(*v)]);
        }
        ds
    }

    pub fn from_correlation_map(map: &CorrelationMap) -> Self {
        let mut ds = Dataset::new(&["theta", "phi", "value"]);
        set_grid(&mut ds, &map.grid);
        ds.set("theta_ref", map.reference.theta());
        ds.set("phi_ref", map.reference.phi());
        ds.set("undefined_count", map.undefined_count);
        for (d, v) in map.grid.nodes().iter().zip(&map.values) {
            ds.push_row(vec![Some(d.theta()), Some(d.phi()), *v]);
        }
        ds
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Some(x) if x.is_finite() => format!("{x:?}"),
                    _ => String::new(),
                })
                .collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let nodes: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.clone(), v.and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number)))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut root = Map::new();
        root.insert("metadata".into(), Value::Object(self.metadata.clone()));
        root.insert("columns".into(), Value::from(self.columns.clone()));
        root.insert("nodes".into(), Value::Array(nodes));
        let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("JSON values serialize");
        s.push('\n');
        s
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut metadata = Map::new();
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut header = None;
        for (no, line) in lines.by_ref() {
            if let Some(rest) = line.strip_prefix('#') {
                let (key, value) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("line {}: metadata without ':'", no + 1)))?;
                let value: Value = serde_json::from_str(value.trim())
                    .map_err(|e| Error::Parse(format!("line {}: {e}", no + 1)))?;
                metadata.insert(key.trim().to_string(), value);
            } else {
                header = Some(line);
                break;
            }
        }
        let header = header.ok_or_else(|| Error::Parse("missing header row".into()))?;
        let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        check_columns(&columns)?;
        let mut rows = Vec::new();
        for (no, line) in lines {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != columns.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} fields, found {}",
                    no + 1,
                    columns.len(),
                    fields.len()
                )));
            }
            let row = fields
                .iter()
                .map(|f| parse_field(f).map_err(|e| Error::Parse(format!("line {}: {e}", no + 1))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Dataset { metadata, columns, rows })
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let metadata = root
            .get("metadata")
            .and_then(Value::as_object)
            .cloned()
            .ok_or_else(|| Error::Parse("missing 'metadata' object".into()))?;
        let nodes = root
            .get("nodes")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing 'nodes' array".into()))?;
        let columns: Vec<String> = match (root.get("columns"), nodes.first()) {
            (Some(Value::Array(cols)), _) => cols
                .iter()
                .map(|c| c.as_str().map(str::to_string))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::Parse("'columns' must hold strings".into()))?,
            (Some(_), _) => return Err(Error::Parse("'columns' must be an array".into())),
            (None, Some(Value::Object(first))) => first.keys().cloned().collect(),
            (None, Some(_)) => return Err(Error::Parse("nodes must be objects".into())),
            (None, None) => Vec::new(),
        };
        check_columns(&columns)?;
        let mut rows = Vec::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            let obj = node
                .as_object()
                .ok_or_else(|| Error::Parse(format!("node {i} is not an object")))?;
            if obj.len() != columns.len() {
                return Err(Error::Parse(format!("node {i} has {} fields, expected {}", obj.len(), columns.len())));
            }
            let row = columns
                .iter()
                .map(|c| match obj.get(c) {
                    Some(Value::Null) => Ok(None),
                    Some(Value::Number(n)) => Ok(n.as_f64()),
                    Some(_) => Err(Error::Parse(format!("node {i}: field '{c}' is not a number"))),
                    None => Err(Error::Parse(format!("node {i}: missing field '{c}'"))),
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Dataset { metadata, columns, rows })
    }

    /// Parses either layout, deciding by the first non-blank character.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_csv(text)
        }
    }
}

fn check_columns(columns: &[String]) -> Result<()> {
    for (i, c) in columns.iter().enumerate() {
        if c.is_empty() || c.contains(',') || c.starts_with('#') {
            return Err(Error::Parse(format!("invalid column name '{c}'")));
        }
        if columns[..i].contains(c) {
            return Err(Error::Parse(format!("duplicate column '{c}'")));
        }
    }
    Ok(())
}

fn parse_field(field: &str) -> std::result::Result<Option<f64>, String> {
    let f = field.trim();
    if f.is_empty() {
        return Ok(None);
    }
    let x: f64 = f.parse().map_err(|_| format!("'{f}' is not a number"))?;
    if x.is_finite() {
        Ok(Some(x))
    } else {
        Err(format!("'{f}' is not finite"))
    }
}

fn set_grid(ds: &mut Dataset, grid: &AngularGrid) {
    ds.set("n_theta", grid.n_theta());
    ds.set("n_phi", grid.n_phi());
}

/// A node that contributes most to the comparison error.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeDeviation {
    pub theta: f64,
    pub phi: f64,
    pub reference: f64,
    pub candidate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenReport {
    pub relative_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Largest absolute deviations, worst first.
    pub worst: Vec<NodeDeviation>,
}

impl std::fmt::Display for GoldenReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{}: relative L2 error {:.3e} (tolerance {:.3e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.relative_error,
            self.tolerance
        )?;
        for d in &self.worst {
            writeln!(
                f,
                "  theta={:.6} phi={:.6} reference={:.6e} candidate={:.6e}",
                d.theta, d.phi, d.reference, d.candidate
            )?;
        }
        Ok(())
    }
}

const WORST_NODES: usize = 5;

fn map_grid(ds: &Dataset, role: &str) -> Result<(AngularGrid, Vec<Option<f64>>)> {
    let dim = |key: &str| {
        ds.metadata
            .get(key)
            .and_then(Value::as_u64)
            .map(|v| v as usize)
            .ok_or_else(|| Error::ShapeMismatch(format!("{role} dataset lacks integer metadata '{key}'")))
    };
    let (nt, np) = (dim("n_theta")?, dim("n_phi")?);
    let values = ds
        .column("value")
        .ok_or_else(|| Error::ShapeMismatch(format!("{role} dataset has no 'value' column")))?;
    if nt.checked_mul(np) != Some(values.len()) {
        return Err(Error::ShapeMismatch(format!(
            "{role} dataset has {} rows but metadata says {nt}×{np}",
            values.len()
        )));
    }
    let grid = build_angular_grid(nt, np).map_err(|e| Error::ShapeMismatch(format!("{role} grid: {e}")))?;
    Ok((grid, values))
}

/// Bilinear interpolation of a theta-major map at `(theta, phi)`; periodic
/// in `φ`, clamped in `θ`. `None` if any contributing node is missing.
fn resample(grid: &AngularGrid, values: &[Option<f64>], theta: f64, phi: f64) -> Option<f64> {
    let thetas = grid.thetas();
    let nt = thetas.len();
    let (i0, i1, ft) = if theta <= thetas[0] {
        (0, 0, 0.0)
    } else if theta >= thetas[nt - 1] {
        (nt - 1, nt - 1, 0.0)
    } else {
        let i = thetas.partition_point(|t| *t <= theta) - 1;
        (i, i + 1, (theta - thetas[i]) / (thetas[i + 1] - thetas[i]))
    };
    let np = grid.n_phi();
    let step = grid.phi_step();
    let u = (phi - grid.phi_at(0)).rem_euclid(2.0 * std::f64::consts::PI) / step;
    let j0 = (u.floor() as usize) % np;
    let j1 = (j0 + 1) % np;
    let fp = u - u.floor();
    let at = |i: usize, j: usize| values[grid.index(i, j)];
    let lo = at(i0, j0)? * (1.0 - fp) + at(i0, j1)? * fp;
    let hi = at(i1, j0)? * (1.0 - fp) + at(i1, j1)? * fp;
    Some(lo * (1.0 - ft) + hi * ft)
}

/// Weighted relative L² distance of `candidate` from `reference`, after
/// resampling the candidate onto the reference nodes. Nodes missing in
/// either dataset are skipped.
pub fn golden_check(candidate: &Dataset, reference: &Dataset, tolerance: f64) -> Result<GoldenReport> {
    let (ref_grid, ref_values) = map_grid(reference, "reference")?;
    let (cand_grid, cand_values) = map_grid(candidate, "candidate")?;
    let mut num = NeumaierSum::default();
    let mut den = NeumaierSum::default();
    let mut deviations = Vec::new();
    for (node, (d, w)) in ref_grid.nodes().iter().zip(ref_grid.weights()).enumerate() {
        let Some(r) = ref_values[node] else { continue };
        let Some(c) = resample(&cand_grid, &cand_values, d.theta(), d.phi()) else {
            continue;
        };
        num.add(w * (c - r) * (c - r));
        den.add(w * r * r);
        deviations.push(NodeDeviation {
            theta: d.theta(),
            phi: d.phi(),
            reference: r,
            candidate: c,
        });
    }
    let relative_error = if den.total() > 0.0 {
        (num.total() / den.total()).sqrt()
    } else if num.total() == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    deviations.sort_by(|a, b| (b.candidate - b.reference).abs().total_cmp(&(a.candidate - a.reference).abs()));
    deviations.truncate(WORST_NODES);
    Ok(GoldenReport {
        relative_error,
        tolerance,
        passed: relative_error <= tolerance,
        worst: deviations,
    })
}
