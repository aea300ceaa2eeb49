//! Convergence tables and small statistics helpers shared by every estimator.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// One `(n, estimate, target, error)` line of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: usize,
    pub estimate: f64,
    /// `None` when no exact target is known.
    pub target: Option<f64>,
    pub abs_error: Option<f64>,
    /// Monte Carlo standard error of `estimate`, when it is an ensemble mean.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Rows are kept strictly increasing in `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub meta: ReportMeta,
    rows: Vec<ReportRow>,
}

pub const REPORT_CSV_HEADER: &str = "n,estimate,target,abs_error";

impl ConvergenceReport {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            meta: ReportMeta {
                label: label.into(),
                ..ReportMeta::default()
            },
            rows: Vec::new(),
        }
    }

    pub fn with_model(mut self, model: impl Into<String>) -> Self {
        self.meta.model = Some(model.into());
        self
    }

    pub fn with_seed(mut self, seed: u64, replicas: usize) -> Self {
        self.meta.seed = Some(seed);
        self.meta.replicas = Some(replicas);
        self
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.meta.notes.push(note.into());
    }

    /// Panics if `n` does not exceed the previous row's `n`.
    pub fn push(&mut self, n: usize, estimate: f64, target: Option<f64>) {
        self.push_row(n, estimate, target, None);
    }

    pub fn push_row(&mut self, n: usize, estimate: f64, target: Option<f64>, std_error: Option<f64>) {
        if let Some(last) = self.rows.last() {
            assert!(
                n > last.n,
                "report rows must be strictly increasing in n ({} then {n})",
                last.n
            );
        }
        self.rows.push(ReportRow {
            n,
            estimate,
            target,
            abs_error: target.map(|t| (estimate - t).abs()),
            std_error,
        });
    }

    pub fn rows(&self) -> &[ReportRow] {
        &self.rows
    }

    pub fn last(&self) -> Option<&ReportRow> {
        self.rows.last()
    }

    pub fn row_at(&self, n: usize) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    /// Data lines without header, in the `n,estimate,target,abs_error` schema.
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let target = r.target.map_or("unknown".to_string(), |t| t.to_string());
            let err = r.abs_error.map_or("n/a".to_string(), |e| e.to_string());
            let _ = writeln!(out, "{},{},{},{}", r.n, r.estimate, target, err);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        format!("{REPORT_CSV_HEADER}\n{}", self.csv_rows())
    }
}

/// Sample mean with its standard error `s/√k` (sample standard deviation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

impl Estimate {
    pub fn from_samples<I: IntoIterator<Item = f64>>(samples: I) -> Self {
        let xs: Vec<f64> = samples.into_iter().collect();
        let k = xs.len();
        if k == 0 {
            return Estimate {
                mean: f64::NAN,
                std_error: f64::NAN,
                count: 0,
            };
        }
        let mean = xs.iter().sum::<f64>() / k as f64;
        let std_error = if k < 2 {
            0.0
        } else {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
            (var / k as f64).sqrt()
        };
        Estimate {
            mean,
            std_error,
            count: k,
        }
    }
}

/// `round(start · factor^i)` for `i < count`, deduplicated and increasing.
pub fn geometric_grid(start: usize, factor: f64, count: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(count);
    let mut x = start as f64;
    for _ in 0..count {
        let v = x.round() as usize;
        if out.last().is_none_or(|&l| v > l) {
            out.push(v);
        }
        x *= factor;
    }
    out
}

/// Powers of two below `n`, then `n` itself.
pub fn doubling_grid_to(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(1usize), |&m| m.checked_mul(2))
        .take_while(|&m| m < n)
        .collect();
    if n > 0 {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_schema() {
        let mut r = ConvergenceReport::new("t");
        r.push(1, 0.5, Some(0.25));
        r.push(2, 0.5, None);
        assert_eq!(
            r.to_csv(),
            "n,estimate,target,abs_error\n1,0.5,0.25,0.25\n2,0.5,unknown,n/a\n"
        );
    }

    #[test]
    #[should_panic(expected = "strictly increasing")]
    fn rows_must_increase() {
        let mut r = ConvergenceReport::new("t");
        r.push(2, 0.0, None);
        r.push(2, 0.0, None);
    }

    #[test]
    fn estimate_examples() {
        let e = Estimate::from_samples([0.0, 1.0]);
        assert_eq!(e.mean, 0.5);
        assert!((e.std_error - 0.5).abs() < 1e-15);
        let e = Estimate::from_samples(vec![0.3; 100]);
        assert!((e.mean - 0.3).abs() < 1e-15);
        assert!(e.std_error < 1e-15);
    }

    #[test]
    fn grids() {
        assert_eq!(geometric_grid(256, 2.0, 4), vec![256, 512, 1024, 2048]);
        assert_eq!(geometric_grid(1, 1.5, 5), vec![1, 2, 3, 5]);
        assert_eq!(doubling_grid_to(10), vec![1, 2, 4, 8, 10]);
        assert_eq!(doubling_grid_to(8), vec![1, 2, 4, 8]);
    }
}
