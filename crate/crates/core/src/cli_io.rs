//! Dataset ingestion, covariate scaling and run-report serialization.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::estimator::PairedSample;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub path: PathBuf,
    pub x_column: String,
    pub y_column: String,
    /// Min-max scale the covariate to `[0, 1]` after dropping bad rows.
    pub scale_x: bool,
    pub delimiter: u8,
    /// Value that marks a missing measurement (e.g. `-200`).
    pub na_sentinel: Option<f64>,
}

impl DatasetSpec {
    pub fn new(path: impl Into<PathBuf>, x_column: impl Into<String>, y_column: impl Into<String>) -> Self {
        DatasetSpec {
            path: path.into(),
            x_column: x_column.into(),
            y_column: y_column.into(),
            scale_x: false,
            delimiter: b',',
            na_sentinel: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedData {
    pub sample: PairedSample,
    /// Rows dropped for missing or non-numeric entries.
    pub dropped: usize,
    pub total_rows: usize,
}

fn parse_cell(raw: &str, delimiter: u8) -> Option<f64> {
    let s = raw.trim();
    if s.is_empty() {
        return None;
    }
    let v = match s.parse::<f64>() {
        Ok(v) => v,
        // Semicolon-separated exports often use a decimal comma.
        Err(_) if delimiter != b',' && s.matches(',').count() == 1 => s.replace(',', ".").parse().ok()?,
        Err(_) => return None,
    };
    v.is_finite().then_some(v)
}

pub fn load_csv(spec: &DatasetSpec) -> Result<LoadedData> {
    if !spec.path.exists() {
        return Err(Error::FileNotFound(spec.path.clone()));
    }
    let mut reader =
        csv::ReaderBuilder::new().delimiter(spec.delimiter).has_headers(true).flexible(true).from_path(&spec.path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::ColumnMissing(name.to_string()))
    };
    let (xi, yi) = (find(&spec.x_column)?, find(&spec.y_column)?);

    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let (mut dropped, mut total) = (0, 0);
    for record in reader.records() {
        let record = record?;
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        total += 1;
        let x = record.get(xi).and_then(|c| parse_cell(c, spec.delimiter));
        let y = record.get(yi).and_then(|c| parse_cell(c, spec.delimiter));
        match (x, y) {
            (Some(x), Some(y)) if spec.na_sentinel.is_none_or(|s| x != s && y != s) => {
                xs.push(x);
                ys.push(y);
            }
            _ => dropped += 1,
        }
    }
    if xs.is_empty() {
        return Err(Error::NoValidRows);
    }
    if spec.scale_x {
        xs = min_max_scale(&xs)?;
    }
    Ok(LoadedData { sample: PairedSample::new(xs, ys)?, dropped, total_rows: total })
}

/// `(x - min) / (max - min)`.
pub fn min_max_scale(xs: &[f64]) -> Result<Vec<f64>> {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    if hi <= lo {
        return Err(Error::ConstantColumn);
    }
    let span = hi - lo;
    Ok(xs.iter().map(|&x| (x - lo) / span).collect())
}

/// Rounds to 10 significant digits.
pub fn round_sig10(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.9e}").parse().expect("formatted float parses")
}

pub fn format_real(v: f64) -> String {
    format!("{}", round_sig10(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::InvalidParameter(format!("unknown output format `{other}`"))),
        }
    }
}

/// Everything a CLI run produced, with enough metadata to rerun it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub timestamp: Option<String>,
    pub parameters: BTreeMap<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Command-specific top-level fields.
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl RunReport {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        RunReport {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            timestamp: None,
            parameters: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).expect("parameter serializes");
        self.parameters.insert(key.to_string(), round_value(v));
        self
    }

    pub fn extra(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).expect("field serializes");
        self.extra.insert(key.to_string(), round_value(v));
        self
    }

    /// Appends a row, rounded to 10 significant digits.
    pub fn push_row(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row.iter().map(|&v| round_sig10(v)).collect());
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        Ok(serde_json::from_slice(bytes)?)
    }
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round_sig10(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

pub fn emit_report(report: &RunReport, format: OutputFormat) -> Result<Vec<u8>> {
    match format {
        OutputFormat::Json => {
            let mut out = serde_json::to_vec_pretty(report)?;
            out.push(b'\n');
            Ok(out)
        }
        OutputFormat::Csv => {
            let mut out = report.columns.join(",");
            out.push('\n');
            for row in &report.rows {
                let mut first = true;
                for &v in row {
                    if !first {
                        out.push(',');
                    }
                    first = false;
                    write!(out, "{}", format_real(v)).expect("writing to a String");
                }
                out.push('\n');
            }
            Ok(out.into_bytes())
        }
    }
}

fn parse_real(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::InvalidParameter(format!("`{s}` is not a finite number")))
}

fn snap(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

/// Trimming grid as `lo:hi:step` (inclusive) or a comma-separated list.
pub fn parse_alpha_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [lo, hi, step] => {
            let (lo, hi, step) = (parse_real(lo)?, parse_real(hi)?, parse_real(step)?);
            if step <= 0.0 || hi < lo {
                return Err(Error::InvalidParameter(format!("bad alpha range `{s}`")));
            }
            let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| snap(lo + i as f64 * step)).collect()
        }
        [list] => list.split(',').map(parse_real).collect::<Result<Vec<_>>>()?,
        _ => return Err(Error::InvalidParameter(format!("bad alpha grid `{s}`"))),
    };
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("alpha grid must be strictly increasing".into()));
    }
    Ok(grid)
}

/// Query grid as `lo:hi:points`, evenly spaced with both ends included.
pub fn parse_query_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, points] = parts.as_slice() else {
        return Err(Error::InvalidParameter(format!("bad query grid `{s}`, expected lo:hi:points")));
    };
    let (lo, hi) = (parse_real(lo)?, parse_real(hi)?);
    let points: usize =
        points.trim().parse().map_err(|_| Error::InvalidParameter(format!("`{points}` is not a point count")))?;
    if points == 0 || hi < lo || (points == 1 && hi != lo) {
        return Err(Error::InvalidParameter(format!("bad query grid `{s}`")));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| if i + 1 == points { hi } else { snap(lo + i as f64 * step) }).collect())
}
