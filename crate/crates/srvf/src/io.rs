//! CSV ingestion/serialization for function collections and the JSON
//! alignment artifact.
//!
//! CSV layout: header `t,f1,f2,...`, first column strictly increasing
//! sample times, remaining columns function values. Values are written
//! with shortest round-trip formatting, so write-then-read is lossless.

use crate::align::AlignmentResult;
use crate::datasets::FunctionCollection;
use crate::error::{Error, Result};
use crate::function::SampledFunction;
use crate::metrics::MetricReport;
use serde_json::json;
use std::fs;
use std::path::Path;

/// Parse a function collection from CSV.
pub fn read_csv(path: &Path) -> Result<FunctionCollection> {
    let text = fs::read_to_string(path)?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<FunctionCollection> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let labels: Vec<String> = header.split(',').skip(1).map(|s| s.trim().to_string()).collect();
    if labels.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "header must name a time column and at least one function column".into(),
        });
    }
    let n_cols = labels.len() + 1;

    let mut times: Vec<f64> = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); labels.len()];
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != n_cols {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected {n_cols} columns, found {}", cells.len()),
            });
        }
        let mut parsed = Vec::with_capacity(n_cols);
        for cell in &cells {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("non-numeric cell '{}'", cell.trim()),
            })?;
            parsed.push(v);
        }
        if let Some(&last) = times.last() {
            if parsed[0] <= last {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!(
                        "time column must be strictly increasing ({} after {})",
                        parsed[0], last
                    ),
                });
            }
        }
        times.push(parsed[0]);
        for (col, v) in columns.iter_mut().zip(&parsed[1..]) {
            col.push(*v);
        }
    }
    if times.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "no data rows".into(),
        });
    }
    let (t0, t1) = (times[0], *times.last().unwrap());
    let functions: Result<Vec<SampledFunction>> = columns
        .into_iter()
        .map(|values| SampledFunction::new(t0, t1, values))
        .collect();
    Ok(FunctionCollection::new(functions?, labels))
}

/// Serialize a collection back to CSV (lossless round trip).
pub fn write_csv(path: &Path, c: &FunctionCollection) -> Result<()> {
    let mut out = String::from("t");
    for label in &c.labels {
        out.push(',');
        out.push_str(label);
    }
    out.push('\n');
    let times = c.functions[0].times();
    for (k, t) in times.iter().enumerate() {
        out.push_str(&format!("{t}"));
        for f in &c.functions {
            out.push_str(&format!(",{}", f.values()[k]));
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Serialize the alignment artifact as JSON.
pub fn write_alignment_json(
    path: &Path,
    result: &AlignmentResult,
    metrics: &MetricReport,
) -> Result<()> {
    let value = alignment_json(result, metrics);
    write_atomic(path, serde_json::to_string_pretty(&value).expect("serializable").as_bytes())
}

pub fn alignment_json(result: &AlignmentResult, metrics: &MetricReport) -> serde_json::Value {
    json!({
        "grid": result.template_function.times(),
        "template": result.template_function.values(),
        "warps": result.warps.iter().map(|w| w.values().to_vec()).collect::<Vec<_>>(),
        "aligned": result.aligned.iter().map(|f| f.values().to_vec()).collect::<Vec<_>>(),
        "cost_trace": result.cost_trace,
        "metrics": { "ls": metrics.ls, "pc": metrics.pc, "sls": metrics.sls },
        "converged": result.converged,
    })
}

/// Write via a temp file in the target directory plus rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    if !dir.as_os_str().is_empty() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp~");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
