//! Block entropies `H_n = −Σ_{|w|=n} μ[w] log2 μ[w]` and entropy-rate tables.
//!
//! `H_n/n` and the increments `H_{n+1} − H_n` both decrease to the entropy
//! rate `h(μ)` of a stationary measure. Closed forms are available for
//! Bernoulli and Markov measures and serve as oracles for the tables.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logprob::xlog2x;
use crate::measures::{Cursor, MeasureModel};

/// Largest block length enumerated exhaustively (`2^26` cylinders).
pub const MAX_BLOCK_LEN: usize = 26;
/// Cylinders lighter than `2^-1000` contribute nothing measurable.
const NEGLIGIBLE_LOG_PROB: f64 = -1000.0;
const SPLIT_DEPTH: usize = 8;
const MONOTONE_TOL: f64 = 1e-9;

/// Compensated (Neumaier) accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    sum: f64,
    carry: f64,
}

impl Accumulator {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(&mut self, other: &Accumulator) {
        self.add(other.sum);
        self.add(other.carry);
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `−μ[w] log2 μ[w]` for a node, or `None` when the subtree is negligible.
fn node_term(c: &Cursor<'_>) -> Option<f64> {
    let lp = c.log_prob().value();
    if lp < NEGLIGIBLE_LOG_PROB {
        return None;
    }
    Some(-lp.exp2() * lp)
}

fn accumulate(c: &Cursor<'_>, max_depth: usize, acc: &mut [Accumulator]) {
    let depth = c.len();
    if depth == max_depth {
        return;
    }
    for b in [0u8, 1] {
        let child = c.child(b);
        if let Some(t) = node_term(&child) {
            acc[depth + 1].add(t);
            accumulate(&child, max_depth, acc);
        }
    }
}

/// Collects the non-negligible cursors at depth `split`, accumulating every
/// shallower depth on the way.
fn frontier<'m>(c: Cursor<'m>, split: usize, acc: &mut [Accumulator], out: &mut Vec<Cursor<'m>>) {
    if c.len() == split {
        out.push(c);
        return;
    }
    for b in [0u8, 1] {
        let child = c.child(b);
        if let Some(t) = node_term(&child) {
            acc[child.len()].add(t);
            frontier(child, split, acc, out);
        }
    }
}

/// `[H_0, H_1, …, H_{n_max}]`, from one lexicographic sweep of the cylinder tree.
pub fn block_entropies(model: &MeasureModel, n_max: usize) -> Result<Vec<f64>> {
    if n_max > MAX_BLOCK_LEN {
        return Err(Error::BudgetExceeded {
            what: "block length",
            requested: n_max,
            limit: MAX_BLOCK_LEN,
        });
    }
    let mut acc = vec![Accumulator::default(); n_max + 1];
    let split = n_max.min(SPLIT_DEPTH);
    let mut leaves = Vec::new();
    frontier(model.cursor(), split, &mut acc, &mut leaves);

    // Subtrees are independent; merge them back in lexicographic order.
    let partials: Vec<Vec<Accumulator>> = leaves
        .par_iter()
        .map(|leaf| {
            let mut local = vec![Accumulator::default(); n_max + 1];
            accumulate(leaf, n_max, &mut local);
            local
        })
        .collect();
    for local in &partials {
        for (a, l) in acc.iter_mut().zip(local) {
            a.merge(l);
        }
    }
    Ok(acc.iter().map(Accumulator::value).collect())
}

/// `H_n` for `1 ≤ n ≤ 26`.
pub fn block_entropy(model: &MeasureModel, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("block length must be at least 1".into()));
    }
    Ok(block_entropies(model, n)?[n])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyRow {
    pub n: usize,
    pub h_n: f64,
    pub h_n_over_n: f64,
    /// `H_{n+1} − H_n`, the conditional entropy of one symbol given `n` before it.
    pub increment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyTable {
    pub rows: Vec<EntropyRow>,
    /// True when every monotonicity law holds within `1e-9`.
    pub monotone: bool,
    pub violations: Vec<String>,
}

pub const ENTROPY_CSV_HEADER: &str = "n,H_n,H_n_over_n,increment";

impl EntropyTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{ENTROPY_CSV_HEADER}\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.n, r.h_n, r.h_n_over_n, r.increment));
        }
        out
    }

    /// The practical rate estimate: the last increment.
    pub fn rate_estimate(&self) -> Option<f64> {
        self.rows.last().map(|r| r.increment)
    }
}

/// Rows `n = 1..=n_max` of `H_n`, `H_n/n` and `H_{n+1} − H_n` (`n_max ≤ 25`).
pub fn entropy_rate_table(model: &MeasureModel, n_max: usize) -> Result<EntropyTable> {
    if n_max + 1 > MAX_BLOCK_LEN {
        return Err(Error::BudgetExceeded {
            what: "table length",
            requested: n_max,
            limit: MAX_BLOCK_LEN - 1,
        });
    }
    let h = block_entropies(model, n_max + 1)?;
    let rows: Vec<EntropyRow> = (1..=n_max)
        .map(|n| EntropyRow {
            n,
            h_n: h[n],
            h_n_over_n: h[n] / n as f64,
            increment: h[n + 1] - h[n],
        })
        .collect();

    let mut violations = Vec::new();
    if let Some(first) = rows.first() {
        if first.h_n < -MONOTONE_TOL {
            violations.push(format!("H_1 = {} is negative", first.h_n));
        }
    }
    for r in &rows {
        if r.increment < -MONOTONE_TOL {
            violations.push(format!("H_n decreases at n = {}", r.n));
        }
    }
    for pair in rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if b.increment > a.increment + MONOTONE_TOL {
            violations.push(format!("increment increases at n = {}", b.n));
        }
        if b.h_n_over_n > a.h_n_over_n + MONOTONE_TOL {
            violations.push(format!("H_n/n increases at n = {}", b.n));
        }
    }
    Ok(EntropyTable {
        rows,
        monotone: violations.is_empty(),
        violations,
    })
}

/// `−p log2 p − (1−p) log2 (1−p)`.
pub fn bernoulli_entropy(p: f64) -> f64 {
    -xlog2x(p) - xlog2x(1.0 - p)
}

/// `−Σ_a π_a Σ_b P_ab log2 P_ab`.
pub fn markov_entropy_rate(pi: &[f64; 2], transition: &[[f64; 2]; 2]) -> f64 {
    pi.iter()
        .zip(transition)
        .map(|(p, row)| -p * row.iter().map(|&q| xlog2x(q)).sum::<f64>())
        .sum()
}

/// Entropy rate in bits per symbol for Bernoulli and Markov models.
pub fn closed_form_entropy(model: &MeasureModel) -> Result<f64> {
    match model {
        MeasureModel::Bernoulli { p } => Ok(bernoulli_entropy(*p)),
        MeasureModel::Markov { pi, transition } => Ok(markov_entropy_rate(pi, transition)),
        MeasureModel::HiddenMarkov { .. } => Err(Error::NoClosedForm("hidden_markov")),
        MeasureModel::Mixture { .. } => Err(Error::NoClosedForm("mixture")),
    }
}
