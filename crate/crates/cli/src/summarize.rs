//! Aggregation of per-replica convergence reports.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use smb_core::report::REPORT_CSV_HEADER;
use smb_core::Estimate;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub n: usize,
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
    /// Fraction of rows with `abs_error < tol`; `None` when no row has a target.
    pub pass_fraction: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub files: usize,
    pub tolerance: f64,
    pub min_pass_fraction: f64,
    pub rows: Vec<SummaryRow>,
    /// The verdict at the largest `n`.
    pub pass: bool,
}

struct Cell {
    estimates: Vec<f64>,
    passed: usize,
    scored: usize,
}

fn parse_field(path: &Path, line: usize, field: &str) -> Result<Option<f64>, CliError> {
    match field {
        "unknown" | "n/a" => Ok(None),
        f => f
            .parse()
            .map(Some)
            .map_err(|_| CliError::SchemaMismatch(format!("{}:{line}: bad number {f:?}", path.display()))),
    }
}

/// Reads report CSVs sharing the `n,estimate,target,abs_error` schema and
/// aggregates them per `n`. Rows pass when `abs_error < tol`; an `n` passes
/// when at least `min_pass_fraction` of its scored rows do.
pub fn summarize<P: AsRef<Path>>(report_files: &[P], tol: f64, min_pass_fraction: f64) -> Result<Summary, CliError> {
    let mut cells: BTreeMap<usize, Cell> = BTreeMap::new();
    for path in report_files {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::IoFailure {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim_end() == REPORT_CSV_HEADER => {}
            Some((_, header)) => {
                return Err(CliError::SchemaMismatch(format!(
                    "{}: header {header:?} is not {REPORT_CSV_HEADER:?}",
                    path.display()
                )))
            }
            None => return Err(CliError::SchemaMismatch(format!("{}: empty report", path.display()))),
        }
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() || line.trim_end() == REPORT_CSV_HEADER {
                continue;
            }
            let fields: Vec<&str> = line.trim_end().split(',').collect();
            let [n, estimate, _target, abs_error] = fields[..] else {
                return Err(CliError::SchemaMismatch(format!(
                    "{}:{line_no}: expected 4 fields, found {}",
                    path.display(),
                    fields.len()
                )));
            };
            let n: usize = n
                .parse()
                .map_err(|_| CliError::SchemaMismatch(format!("{}:{line_no}: bad n {n:?}", path.display())))?;
            let estimate = parse_field(path, line_no, estimate)?
                .ok_or_else(|| CliError::SchemaMismatch(format!("{}:{line_no}: missing estimate", path.display())))?;
            let abs_error = parse_field(path, line_no, abs_error)?;
            let cell = cells.entry(n).or_insert(Cell {
                estimates: Vec::new(),
                passed: 0,
                scored: 0,
            });
            cell.estimates.push(estimate);
            if let Some(e) = abs_error {
                cell.scored += 1;
                cell.passed += usize::from(e < tol);
            }
        }
    }

    let rows: Vec<SummaryRow> = cells
        .into_iter()
        .map(|(n, cell)| {
            let est = Estimate::from_samples(cell.estimates);
            let pass_fraction = (cell.scored > 0).then(|| cell.passed as f64 / cell.scored as f64);
            SummaryRow {
                n,
                mean: est.mean,
                std_error: est.std_error,
                count: est.count,
                pass_fraction,
                pass: pass_fraction.is_some_and(|f| f >= min_pass_fraction),
            }
        })
        .collect();
    let pass = rows.last().is_some_and(|r| r.pass);
    Ok(Summary {
        files: report_files.len(),
        tolerance: tol,
        min_pass_fraction,
        rows,
        pass,
    })
}
