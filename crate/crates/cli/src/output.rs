//! CSV and JSON writers. Numbers are printed with 17 significant digits.

use std::io::Write;
use std::path::Path;

use hgreen::{GroupSpec, Point};
use serde::Serialize;

use crate::CliError;

pub fn header(spec: &GroupSpec, last: &str) -> String {
    let mut cols: Vec<String> = (1..=spec.m()).map(|i| format!("x{i}")).collect();
    cols.extend((1..=spec.n()).map(|k| format!("t{k}")));
    cols.push(last.to_string());
    cols.join(",")
}

pub fn row(p: &Point, value: f64) -> String {
    let mut cells: Vec<String> = p.coords().iter().map(|v| format!("{v:.16e}")).collect();
    cells.push(format!("{value:.16e}"));
    cells.join(",")
}

pub fn csv(spec: &GroupSpec, last: &str, points: &[Point], values: &[f64]) -> String {
    let mut s = header(spec, last);
    s.push('\n');
    for (p, v) in points.iter().zip(values) {
        s.push_str(&row(p, *v));
        s.push('\n');
    }
    s
}

pub fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Usage(e.to_string()))
        }
    }
}
