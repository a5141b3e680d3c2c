//! File formats: wide-CSV datasets, JSON model documents, and CSV reports.
//!
//! A dataset is a wide CSV whose first column `t` carries the strictly
//! increasing grid and every further column one function. Model documents
//! are JSON envelopes `{format_version, kind, payload}` with kind one of
//! `knots`, `spline`, or `m2p`; numbers survive a round trip bit-exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bspline::{FunctionSet, KnotSequence, SplineModel};
use crate::error::Error;
use crate::m2p::M2PModel;
use crate::placement::BoundReport;
use crate::Result;

/// Version written into every model document.
pub const FORMAT_VERSION: u64 = 1;

/// A parsed dataset: per-function column names plus the shared-grid values.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub names: Vec<String>,
    pub set: FunctionSet,
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn bad_dataset(path: &Path, message: impl Into<String>) -> Error {
    Error::BadDataset {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => io_error(path, source),
        csv::ErrorKind::UnequalLengths { pos, expected_len, len } => bad_dataset(
            path,
            format!(
                "row {} has {len} fields, expected {expected_len}",
                pos.map_or_else(|| "?".to_string(), |p| p.line().to_string())
            ),
        ),
        other => bad_dataset(path, format!("{other:?}")),
    }
}

/// Reads a wide-CSV dataset, keeping column order as function order.
pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;

    let headers = reader.headers().map_err(|e| csv_error(path, e))?;
    if headers.get(0) != Some("t") {
        return Err(bad_dataset(
            path,
            format!(
                "first column must be named \"t\", found {:?}",
                headers.get(0).unwrap_or("")
            ),
        ));
    }
    let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    if names.is_empty() {
        return Err(bad_dataset(path, "no function columns after the grid column"));
    }

    let mut grid: Vec<f64> = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let mut parsed = Vec::with_capacity(record.len());
        for (idx, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::CsvCell {
                path: path.to_path_buf(),
                row: line,
                column: idx + 1,
                message: format!("cannot parse {field:?} as a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::CsvCell {
                    path: path.to_path_buf(),
                    row: line,
                    column: idx + 1,
                    message: format!("non-finite value {field:?}"),
                });
            }
            parsed.push(value);
        }
        if let Some(&last) = grid.last() {
            if parsed[0] <= last {
                return Err(Error::CsvCell {
                    path: path.to_path_buf(),
                    row: line,
                    column: 1,
                    message: format!("grid value {} does not increase past {last}", parsed[0]),
                });
            }
        }
        grid.push(parsed[0]);
        for (col, &v) in columns.iter_mut().zip(&parsed[1..]) {
            col.push(v);
        }
    }
    if grid.is_empty() {
        return Err(bad_dataset(path, "no data rows"));
    }
    Ok(Dataset {
        names,
        set: FunctionSet::new(grid, columns)?,
    })
}

/// Reads a dataset, discarding the column names.
pub fn read_function_set(path: impl AsRef<Path>) -> Result<FunctionSet> {
    Ok(read_dataset(path)?.set)
}

/// Writes a function set as a wide CSV with one named column per function.
pub fn write_dataset(path: impl AsRef<Path>, names: &[String], set: &FunctionSet) -> Result<()> {
    let path = path.as_ref();
    if names.len() != set.function_count() {
        return Err(Error::LengthMismatch {
            left: names.len(),
            right: set.function_count(),
        });
    }
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header = vec!["t".to_string()];
    header.extend_from_slice(names);
    writer.write_record(&header).map_err(|e| csv_error(path, e))?;
    for (j, &t) in set.grid().iter().enumerate() {
        let mut record = vec![format_float(t)];
        for i in 0..set.function_count() {
            record.push(format_float(set.row(i)[j]));
        }
        writer.write_record(&record).map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| io_error(path, e))?;
    Ok(())
}

/// A serializable model: a knot sequence alone, a fitted spline, or a full
/// regression pipeline.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum ModelDocument {
    Knots(KnotSequence),
    Spline(SplineModel),
    M2P(M2PModel),
}

impl ModelDocument {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelDocument::Knots(_) => "knots",
            ModelDocument::Spline(_) => "spline",
            ModelDocument::M2P(_) => "m2p",
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    format_version: u64,
    kind: &'a str,
    payload: &'a T,
}

fn to_document<T: Serialize>(kind: &str, payload: &T) -> Result<String> {
    serde_json::to_string_pretty(&Envelope {
        format_version: FORMAT_VERSION,
        kind,
        payload,
    })
    .map_err(|e| Error::MalformedDocument(e.to_string()))
}

/// Serializes a model document to pretty JSON at `path`.
pub fn write_model(document: &ModelDocument, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = match document {
        ModelDocument::Knots(k) => to_document("knots", k)?,
        ModelDocument::Spline(s) => to_document("spline", s)?,
        ModelDocument::M2P(m) => to_document("m2p", m)?,
    };
    text.push('\n');
    fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Parses a model document, checking the envelope version and kind.
pub fn read_model(path: impl AsRef<Path>) -> Result<ModelDocument> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::MalformedDocument(e.to_string()))?;
    let object = value
        .as_object()
        .ok_or_else(|| Error::MalformedDocument("top level is not an object".into()))?;
    let version = object
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::MalformedDocument("missing or non-integer format_version".into()))?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let kind = object
        .get("kind")
        .and_then(serde_json::Value::as_str)
        .ok_or_else(|| Error::MalformedDocument("missing kind".into()))?;
    let payload = object
        .get("payload")
        .cloned()
        .ok_or_else(|| Error::MalformedDocument("missing payload".into()))?;
    let parse = |e: serde_json::Error| Error::MalformedDocument(e.to_string());
    match kind {
        "knots" => Ok(ModelDocument::Knots(
            serde_json::from_value(payload).map_err(parse)?,
        )),
        "spline" => Ok(ModelDocument::Spline(
            serde_json::from_value(payload).map_err(parse)?,
        )),
        "m2p" => Ok(ModelDocument::M2P(
            serde_json::from_value(payload).map_err(parse)?,
        )),
        other => Err(Error::MalformedDocument(format!(
            "unknown model kind {other:?}"
        ))),
    }
}

/// Reads a document that must hold a bare knot sequence.
pub fn read_knots(path: impl AsRef<Path>) -> Result<KnotSequence> {
    match read_model(path)? {
        ModelDocument::Knots(k) => Ok(k),
        other => Err(Error::KindMismatch {
            expected: "knots",
            found: other.kind().to_string(),
        }),
    }
}

/// Reads a document that must hold a fitted spline.
pub fn read_spline(path: impl AsRef<Path>) -> Result<SplineModel> {
    match read_model(path)? {
        ModelDocument::Spline(s) => Ok(s),
        other => Err(Error::KindMismatch {
            expected: "spline",
            found: other.kind().to_string(),
        }),
    }
}

/// Reads a document that must hold a trained pipeline.
pub fn read_m2p(path: impl AsRef<Path>) -> Result<M2PModel> {
    match read_model(path)? {
        ModelDocument::M2P(m) => Ok(m),
        other => Err(Error::KindMismatch {
            expected: "m2p",
            found: other.kind().to_string(),
        }),
    }
}

/// One aggregate comparison row: metrics averaged over the dataset's
/// functions for one (method, sweep point) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub method: String,
    pub degree: usize,
    pub knot_count: usize,
    pub epsilon: Option<f64>,
    pub max_abs_error: f64,
    pub rmse: f64,
    pub gcv: f64,
}

/// Per-function detail row; `function` is a column name or the aggregate
/// labels `mean` / `max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionRow {
    pub method: String,
    pub degree: usize,
    pub knot_count: usize,
    pub epsilon: Option<f64>,
    pub function: String,
    pub max_abs_error: f64,
    pub rmse: f64,
    pub gcv: f64,
}

fn format_float(v: f64) -> String {
    format!("{v}")
}

fn format_epsilon(eps: Option<f64>) -> String {
    eps.map(format_float).unwrap_or_default()
}

fn open_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

/// Writes the aggregate comparison report (header always present).
pub fn write_comparison_report(path: impl AsRef<Path>, rows: &[ComparisonRow]) -> Result<()> {
    let path = path.as_ref();
    let mut writer = open_writer(path)?;
    writer
        .write_record([
            "method",
            "degree",
            "knot_count",
            "epsilon",
            "max_abs_error",
            "rmse",
            "gcv",
        ])
        .map_err(|e| csv_error(path, e))?;
    for row in rows {
        writer
            .write_record([
                row.method.clone(),
                row.degree.to_string(),
                row.knot_count.to_string(),
                format_epsilon(row.epsilon),
                format_float(row.max_abs_error),
                format_float(row.rmse),
                format_float(row.gcv),
            ])
            .map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| io_error(path, e))?;
    Ok(())
}

/// Writes the per-function detail report.
pub fn write_function_report(path: impl AsRef<Path>, rows: &[FunctionRow]) -> Result<()> {
    let path = path.as_ref();
    let mut writer = open_writer(path)?;
    writer
        .write_record([
            "method",
            "degree",
            "knot_count",
            "epsilon",
            "function",
            "max_abs_error",
            "rmse",
            "gcv",
        ])
        .map_err(|e| csv_error(path, e))?;
    for row in rows {
        writer
            .write_record([
                row.method.clone(),
                row.degree.to_string(),
                row.knot_count.to_string(),
                format_epsilon(row.epsilon),
                row.function.clone(),
                format_float(row.max_abs_error),
                format_float(row.rmse),
                format_float(row.gcv),
            ])
            .map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| io_error(path, e))?;
    Ok(())
}

/// Writes one fitted curve as `(t, actual, fitted)` rows.
pub fn write_curve_csv(
    path: impl AsRef<Path>,
    grid: &[f64],
    actual: &[f64],
    fitted: &[f64],
) -> Result<()> {
    let path = path.as_ref();
    if grid.len() != actual.len() || grid.len() != fitted.len() {
        return Err(Error::LengthMismatch {
            left: grid.len(),
            right: actual.len().min(fitted.len()),
        });
    }
    let mut writer = open_writer(path)?;
    writer
        .write_record(["t", "actual", "fitted"])
        .map_err(|e| csv_error(path, e))?;
    for ((t, a), f) in grid.iter().zip(actual).zip(fitted) {
        writer
            .write_record([format_float(*t), format_float(*a), format_float(*f)])
            .map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| io_error(path, e))?;
    Ok(())
}

/// Writes the interior knot list as `(index, location)` rows.
pub fn write_knot_csv(path: impl AsRef<Path>, knots: &KnotSequence) -> Result<()> {
    let path = path.as_ref();
    let mut writer = open_writer(path)?;
    writer
        .write_record(["index", "location"])
        .map_err(|e| csv_error(path, e))?;
    for (i, k) in knots.interior().iter().enumerate() {
        writer
            .write_record([i.to_string(), format_float(*k)])
            .map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| io_error(path, e))?;
    Ok(())
}

/// Writes a per-span bound report as CSV.
pub fn write_bound_report(path: impl AsRef<Path>, report: &BoundReport) -> Result<()> {
    let path = path.as_ref();
    let mut writer = open_writer(path)?;
    writer
        .write_record(["span_lower", "span_upper", "max_envelope", "delta", "epsilon", "passes"])
        .map_err(|e| csv_error(path, e))?;
    for span in &report.spans {
        writer
            .write_record([
                format_float(span.lower),
                format_float(span.upper),
                format_float(span.max_envelope),
                format_float(span.delta),
                format_float(report.epsilon),
                span.passes.to_string(),
            ])
            .map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| io_error(path, e))?;
    Ok(())
}

/// Returns `path` relative to the directory named by the `FREEKNOT_OUT_DIR`
/// environment variable when it is set and `path` is relative.
pub fn resolve_output_path(path: impl AsRef<Path>) -> PathBuf {
    let path = path.as_ref();
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os("FREEKNOT_OUT_DIR") {
        Some(dir) => PathBuf::from(dir).join(path),
        None => path.to_path_buf(),
    }
}
