//! Computable stand-ins for prefix complexity.
//!
//! Two coders are provided: LZ78 with an exactly specified integer code length,
//! and the ideal code `−log2 μ[w]` of a model. Randomness deficiency is the
//! ideal length minus the compressed length; since a compressor only bounds
//! complexity from above, large deficiencies certify non-typicality while
//! small ones are merely consistent with randomness.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{log_cylinder, MeasureModel};
use crate::report::ConvergenceReport;
use crate::word::BinaryWord;

/// `⌈log2 j⌉` for `j ≥ 1`.
fn ceil_log2(j: u64) -> u64 {
    if j <= 1 {
        0
    } else {
        u64::from(64 - (j - 1).leading_zeros())
    }
}

/// Cost of the `j`-th phrase: a back-reference to one of `j` dictionary
/// entries (the empty phrase included) plus one literal bit.
fn phrase_cost(j: u64) -> u64 {
    ceil_log2(j) + 1
}

/// Incremental LZ78 parser over bits.
///
/// Each phrase is the shortest prefix of the remaining input that is not yet a
/// phrase. An unfinished final phrase is charged like a new phrase.
#[derive(Debug, Clone)]
pub struct Lz78Parser {
    /// Trie over phrases; node 0 is the empty phrase, `0` marks a missing child.
    children: Vec<[u32; 2]>,
    node: u32,
    phrases: u64,
    complete_bits: u64,
    consumed: usize,
}

impl Default for Lz78Parser {
    fn default() -> Self {
        Self {
            children: vec![[0, 0]],
            node: 0,
            phrases: 0,
            complete_bits: 0,
            consumed: 0,
        }
    }
}

impl Lz78Parser {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bit: u8) {
        let b = usize::from(bit != 0);
        self.consumed += 1;
        let next = self.children[self.node as usize][b];
        if next != 0 {
            self.node = next;
            return;
        }
        let id = self.children.len() as u32;
        self.children[self.node as usize][b] = id;
        self.children.push([0, 0]);
        self.phrases += 1;
        self.complete_bits += phrase_cost(self.phrases);
        self.node = 0;
    }

    /// Phrases so far, counting an unfinished final phrase.
    pub fn phrase_count(&self) -> u64 {
        self.phrases + u64::from(self.node != 0)
    }

    /// Code length in bits of everything pushed so far.
    pub fn code_length(&self) -> u64 {
        if self.node == 0 {
            self.complete_bits
        } else {
            self.complete_bits + phrase_cost(self.phrases + 1)
        }
    }

    pub fn len(&self) -> usize {
        self.consumed
    }

    pub fn is_empty(&self) -> bool {
        self.consumed == 0
    }
}

/// LZ78 code length of `w` in bits.
pub fn lz78_codelen(w: &BinaryWord) -> u64 {
    lz78_parse(w).code_length()
}

pub fn lz78_parse(w: &BinaryWord) -> Lz78Parser {
    let mut p = Lz78Parser::new();
    for b in w.iter() {
        p.push(b);
    }
    p
}

/// `−log2 μ[w]`.
pub fn ideal_codelen(model: &MeasureModel, w: &BinaryWord) -> Result<f64> {
    let lp = log_cylinder(model, w);
    if lp.is_null() {
        return Err(Error::NullCylinder { word: w.clone() });
    }
    Ok(lp.bits())
}

/// Which code length stands in for complexity.
#[derive(Debug, Clone, Copy)]
pub enum Coder<'m> {
    Lz78,
    Ideal(&'m MeasureModel),
}

impl Coder<'_> {
    pub fn id(&self) -> String {
        match self {
            Coder::Lz78 => "lz78".into(),
            Coder::Ideal(m) => format!("ideal({})", m.kind()),
        }
    }

    /// Code lengths of `x↾n` for each `n` in an increasing grid, in one pass.
    pub fn prefix_code_lengths(&self, x: &BinaryWord, n_grid: &[usize]) -> Result<Vec<f64>> {
        check_grid(x, n_grid)?;
        let mut out = Vec::with_capacity(n_grid.len());
        match self {
            Coder::Lz78 => {
                let mut p = Lz78Parser::new();
                for &n in n_grid {
                    while p.len() < n {
                        p.push(x[p.len()]);
                    }
                    out.push(p.code_length() as f64);
                }
            }
            Coder::Ideal(model) => {
                let mut c = model.cursor();
                for &n in n_grid {
                    while c.len() < n {
                        c.push(x[c.len()]);
                    }
                    if c.is_null() {
                        return Err(Error::NullCylinder { word: x.prefix(n) });
                    }
                    out.push(c.log_prob().bits());
                }
            }
        }
        Ok(out)
    }
}

fn check_grid(x: &BinaryWord, n_grid: &[usize]) -> Result<()> {
    if n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("n grid must be strictly increasing".into()));
    }
    if let Some(&max) = n_grid.last() {
        if max > x.len() {
            return Err(Error::InvalidArgument(format!(
                "grid reaches n = {max} but the sequence has length {}",
                x.len()
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficiencyRow {
    pub n: usize,
    pub ideal_bits: f64,
    pub coder_bits: f64,
    pub deficiency: f64,
    pub running_sup: f64,
}

/// `−log2 μ[x↾n] − LZ78(x↾n)` along a grid, with its prefix maximum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficiencyTrace {
    pub rows: Vec<DeficiencyRow>,
}

pub const DEFICIENCY_CSV_HEADER: &str = "n,ideal,coder,deficiency,sup";

impl DeficiencyTrace {
    pub fn sup(&self) -> Option<f64> {
        self.rows.last().map(|r| r.running_sup)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{DEFICIENCY_CSV_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.n, r.ideal_bits, r.coder_bits, r.deficiency, r.running_sup
            );
        }
        out
    }
}

pub fn deficiency_trace(model: &MeasureModel, x: &BinaryWord, n_grid: &[usize]) -> Result<DeficiencyTrace> {
    let ideal = Coder::Ideal(model).prefix_code_lengths(x, n_grid)?;
    let lz = Coder::Lz78.prefix_code_lengths(x, n_grid)?;
    let mut sup = f64::NEG_INFINITY;
    let rows = n_grid
        .iter()
        .zip(ideal.iter().zip(&lz))
        .map(|(&n, (&i, &c))| {
            let deficiency = i - c;
            sup = sup.max(deficiency);
            DeficiencyRow {
                n,
                ideal_bits: i,
                coder_bits: c,
                deficiency,
                running_sup: sup,
            }
        })
        .collect();
    Ok(DeficiencyTrace { rows })
}

/// Tail minimum and maximum of `codelen(x↾n)/n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionEstimate {
    /// Proxy for `liminf K(x↾n)/n`.
    pub dim: f64,
    /// Proxy for `limsup K(x↾n)/n`.
    pub dim_strong: f64,
    pub coder: String,
    pub tail_points: usize,
    /// The full rate curve `(n, rate)`.
    pub report: ConvergenceReport,
}

impl DimensionEstimate {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,rate\n");
        for r in self.report.rows() {
            let _ = writeln!(out, "{},{}", r.n, r.estimate);
        }
        out
    }
}

/// Rates `r_n = codelen(x↾n)/n` over `n_grid`; the dimension proxies are the
/// min and max over the last `⌈tail_fraction · |grid|⌉` grid points.
pub fn dim_estimates(
    x: &BinaryWord,
    coder: Coder<'_>,
    n_grid: &[usize],
    tail_fraction: f64,
) -> Result<DimensionEstimate> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tail fraction {tail_fraction} not in (0,1]"
        )));
    }
    if n_grid.is_empty() || n_grid[0] == 0 {
        return Err(Error::InvalidArgument("grid must be nonempty and positive".into()));
    }
    let lengths = coder.prefix_code_lengths(x, n_grid)?;
    let mut report = ConvergenceReport::new("compression rate").with_model(coder.id());
    let rates: Vec<f64> = n_grid.iter().zip(&lengths).map(|(&n, &l)| l / n as f64).collect();
    for (&n, &r) in n_grid.iter().zip(&rates) {
        report.push(n, r, None);
    }
    let tail_points = ((tail_fraction * n_grid.len() as f64).ceil() as usize).clamp(1, n_grid.len());
    let tail = &rates[rates.len() - tail_points..];
    Ok(DimensionEstimate {
        dim: tail.iter().copied().fold(f64::INFINITY, f64::min),
        dim_strong: tail.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        coder: coder.id(),
        tail_points,
        report,
    })
}
