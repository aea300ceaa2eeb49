//! Conditional information along a sequence and the limit theorems built on it.
//!
//! For a sequence `x` the conditional informations are
//!
//! ```text
//! f_0(x) = −log2 μ[x_0]
//! f_k(x) = −log2 μ[x_0 | x_1 … x_k] = log2 μ[x_1 … x_k] − log2 μ[x_0 … x_k]
//! ```
//!
//! and `−log2 μ[x↾n] = Σ_{k<n} f_{n−1−k}(T^k x)` exactly. The per-symbol
//! information `−(1/n) log2 μ[x↾n]` converges to the entropy rate along
//! typical sequences; this module computes the pieces of that argument and
//! reports their convergence.

use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::{closed_form_entropy, entropy_rate_table};
use crate::error::{Error, Result};
use crate::logprob::LogProb;
use crate::measures::{log_cylinder, Cursor, MeasureModel};
use crate::montecarlo::try_fan_out;
use crate::report::{doubling_grid_to, ConvergenceReport, Estimate};
use crate::sampler::SampleRun;
use crate::word::BinaryWord;

pub const DEFAULT_STABILITY_WINDOW: usize = 16;
pub const DEFAULT_STABILITY_TOL: f64 = 1e-6;
/// Block length whose entropy increment stands in for `h(μ)` when there is no closed form.
const BRACKET_BLOCK_LEN: usize = 16;

/// `f_0(x), …, f_K(x)` with its running maximum and a stabilization flag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FkProfile {
    pub x_prefix: BinaryWord,
    pub values: Vec<f64>,
    /// `max_{k ≤ K} f_k`
    pub f_star: f64,
    /// `f_K`, the finite stand-in for the pathwise limit.
    pub f_limit_estimate: f64,
    pub stability_window: usize,
    pub stability_tol: f64,
    pub stable: bool,
}

impl FkProfile {
    pub fn k_max(&self) -> usize {
        self.values.len() - 1
    }

    /// `max_{K−W ≤ k ≤ K} |f_k − f_K| < tol`
    pub fn is_stable(&self, window: usize, tol: f64) -> bool {
        let k = self.k_max();
        let last = self.values[k];
        self.values[k.saturating_sub(window)..]
            .iter()
            .all(|v| (v - last).abs() < tol)
    }

    pub fn with_stability(mut self, window: usize, tol: f64) -> Self {
        self.stable = self.is_stable(window, tol);
        self.stability_window = window;
        self.stability_tol = tol;
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,f_k\n");
        for (k, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{k},{v}\n"));
        }
        out
    }
}

fn need_length(x: &BinaryWord, n: usize, what: &str) -> Result<()> {
    if x.len() < n {
        return Err(Error::InvalidArgument(format!(
            "{what} needs a prefix of length {n}, got {}",
            x.len()
        )));
    }
    Ok(())
}

/// Computes `f_0 … f_K` along `x`, which must have length at least `K + 1`.
pub fn fk_profile(model: &MeasureModel, x: &BinaryWord, k_max: usize) -> Result<FkProfile> {
    need_length(x, k_max + 1, "fk_profile")?;
    // `head` walks x_0 … x_k, `tail` walks x_1 … x_k.
    let mut head = model.cursor();
    let mut tail = model.cursor();
    let mut values = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        head.push(x[k]);
        if k > 0 {
            tail.push(x[k]);
        }
        if head.is_null() {
            return Err(Error::ConditioningOnNull { word: x.prefix(k + 1) });
        }
        values.push(tail.log_prob() - head.log_prob());
    }
    let f_star = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let profile = FkProfile {
        x_prefix: x.prefix(k_max + 1),
        f_limit_estimate: values[k_max],
        values,
        f_star,
        stability_window: DEFAULT_STABILITY_WINDOW,
        stability_tol: DEFAULT_STABILITY_TOL,
        stable: false,
    };
    Ok(profile.with_stability(DEFAULT_STABILITY_WINDOW, DEFAULT_STABILITY_TOL))
}

/// `log2 d` along `x`: `d(ε) = 2`, `d(x_0) = 1/μ[x_0]`,
/// `d(x_0 … x_k) = μ[x_1 … x_k] / μ[x_0 … x_k]`.
///
/// Returns `K + 2` values, `ε` first. Each step multiplies `d` by the ratio of
/// the conditional probabilities of `x_k` with and without `x_0` in the past.
pub fn martingale_values(model: &MeasureModel, x: &BinaryWord, k_max: usize) -> Result<Vec<f64>> {
    need_length(x, k_max + 1, "martingale_values")?;
    let mut head = model.cursor();
    let mut tail = model.cursor();
    let mut out = Vec::with_capacity(k_max + 2);
    out.push(1.0);

    let first = head
        .conditional(x[0])
        .filter(|lp| !lp.is_null())
        .ok_or_else(|| Error::ConditioningOnNull { word: x.prefix(1) })?;
    let mut log_d = -first.value();
    out.push(log_d);
    head.push(x[0]);
    for k in 1..=k_max {
        let with_x0 = head.conditional(x[k]).filter(|lp| !lp.is_null());
        let without_x0 = tail.conditional(x[k]);
        let (Some(with_x0), Some(without_x0)) = (with_x0, without_x0) else {
            return Err(Error::ConditioningOnNull { word: x.prefix(k + 1) });
        };
        log_d += without_x0 - with_x0;
        out.push(log_d);
        head.push(x[k]);
        tail.push(x[k]);
    }
    Ok(out)
}

/// The summands `f_{n−1−k}(T^k x)` for `k = 0..n`.
///
/// Each term reads only the window `x_k … x_{n−1}`. Bernoulli and Markov models
/// use closed forms (`f_j` does not depend on `j ≥ 1` there); other models
/// evaluate every suffix cylinder, which costs `O(n²)` cursor steps.
pub fn decomposition_terms(model: &MeasureModel, x: &BinaryWord, n: usize) -> Result<Vec<f64>> {
    need_length(x, n, "decomposition")?;
    let null = |k: usize| Error::ConditioningOnNull { word: x.slice(k, n) };
    match model {
        MeasureModel::Bernoulli { p } => (0..n)
            .map(|k| {
                let q = if x[k] == 1 { *p } else { 1.0 - p };
                if q == 0.0 {
                    Err(null(k))
                } else {
                    Ok(-q.log2())
                }
            })
            .collect(),
        MeasureModel::Markov { pi, transition } => (0..n)
            .map(|k| {
                let a = x[k] as usize;
                let term = if k + 1 == n {
                    -pi[a].log2()
                } else {
                    let b = x[k + 1] as usize;
                    // μ[x_{k+1} … ] / μ[x_k x_{k+1} … ] = π(b) / (π(a) P(a,b))
                    pi[b].log2() - pi[a].log2() - transition[a][b].log2()
                };
                if term.is_finite() {
                    Ok(term)
                } else {
                    Err(null(k))
                }
            })
            .collect(),
        _ => {
            // suffix[k] = log2 μ[x_k … x_{n−1}], suffix[n] = 0.
            let mut suffix: Vec<LogProb> = (0..n)
                .into_par_iter()
                .map(|k| {
                    let mut c = Cursor::new(model);
                    for i in k..n {
                        c.push(x[i]);
                    }
                    c.log_prob()
                })
                .collect();
            suffix.push(LogProb::ONE);
            (0..n)
                .map(|k| {
                    if suffix[k].is_null() {
                        Err(null(k))
                    } else {
                        Ok(suffix[k + 1] - suffix[k])
                    }
                })
                .collect()
        }
    }
}

/// `|−log2 μ[x↾n] − Σ_{k<n} f_{n−1−k}(T^k x)|`, which is zero up to rounding.
pub fn decomposition_residual(model: &MeasureModel, x: &BinaryWord, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("decomposition needs n ≥ 1".into()));
    }
    let terms = decomposition_terms(model, x, n)?;
    let direct = log_cylinder(model, &x.prefix(n));
    if direct.is_null() {
        return Err(Error::ConditioningOnNull { word: x.prefix(n) });
    }
    let total: f64 = terms.iter().sum();
    Ok((direct.bits() - total).abs())
}

/// Tolerance for [`decomposition_residual`]: `1e-8 · max(1, n/1000)`.
pub fn decomposition_tolerance(n: usize) -> f64 {
    1e-8 * (n as f64 / 1e3).max(1.0)
}

/// What `−(1/n) log2 μ[x↾n]` should converge to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyTarget {
    pub value: Option<f64>,
    pub note: &'static str,
}

/// Closed form when one exists; for hidden-Markov models the block-entropy
/// increment `H_17 − H_16`, an upper bound; for mixtures the common component
/// entropy if all components share it, else unknown.
pub fn entropy_target(model: &MeasureModel) -> Result<EntropyTarget> {
    match model {
        MeasureModel::Bernoulli { .. } | MeasureModel::Markov { .. } => Ok(EntropyTarget {
            value: Some(closed_form_entropy(model)?),
            note: "closed form",
        }),
        MeasureModel::HiddenMarkov { .. } => {
            let table = entropy_rate_table(model, BRACKET_BLOCK_LEN)?;
            Ok(EntropyTarget {
                value: table.rate_estimate(),
                note: "block-entropy increment H_17 - H_16 (upper bound on the rate)",
            })
        }
        MeasureModel::Mixture { components, .. } => {
            let rates: Vec<Option<f64>> = components
                .iter()
                .map(|c| entropy_target(c).map(|t| t.value))
                .collect::<Result<_>>()?;
            let first = rates[0];
            let common = first.filter(|&h| rates.iter().all(|r| r.is_some_and(|r| (r - h).abs() < 1e-12)));
            Ok(EntropyTarget {
                value: common,
                note: "per-sequence limit is the entropy of the sampled ergodic component",
            })
        }
    }
}

/// Rows `(n, −(1/n) log2 μ[x↾n], h)` for each `n` in `n_grid`.
pub fn log_prob_rate(model: &MeasureModel, x: &BinaryWord, n_grid: &[usize]) -> Result<ConvergenceReport> {
    let target = entropy_target(model)?;
    log_prob_rate_with_target(model, x, n_grid, &target)
}

pub fn log_prob_rate_with_target(
    model: &MeasureModel,
    x: &BinaryWord,
    n_grid: &[usize],
    target: &EntropyTarget,
) -> Result<ConvergenceReport> {
    let max = n_grid.iter().copied().max().unwrap_or(0);
    need_length(x, max, "log_prob_rate")?;
    let mut report = ConvergenceReport::new("log-probability rate").with_model(model.kind());
    report.note(format!("target: {}", target.note));
    let mut c = model.cursor();
    let mut grid: Vec<usize> = n_grid.iter().copied().filter(|&n| n > 0).collect();
    grid.sort_unstable();
    grid.dedup();
    for n in grid {
        while c.len() < n {
            c.push(x[c.len()]);
        }
        if c.is_null() {
            return Err(Error::ConditioningOnNull { word: x.prefix(n) });
        }
        report.push(n, c.log_prob().bits() / n as f64, target.value);
    }
    Ok(report)
}

/// Per-replica [`log_prob_rate`] reports in replica order.
pub fn log_prob_rate_ensemble(
    model: &MeasureModel,
    n_grid: &[usize],
    replicas: u64,
    seed: u64,
) -> Result<Vec<ConvergenceReport>> {
    let target = entropy_target(model)?;
    let n = n_grid.iter().copied().max().unwrap_or(0);
    try_fan_out(replicas, |r| {
        let x = SampleRun::new(model, n, seed, r).sample()?;
        let mut report = log_prob_rate_with_target(model, &x, n_grid, &target)?;
        report.meta.seed = Some(seed);
        report.note(format!("replica {r}"));
        Ok(report)
    })
}

/// A finite union of cylinders, the effectively clopen sets used as targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderSet {
    words: Vec<BinaryWord>,
}

impl CylinderSet {
    /// Drops words that extend another member, so the union is disjoint.
    pub fn new(words: Vec<BinaryWord>) -> Self {
        let mut kept: Vec<BinaryWord> = Vec::new();
        let mut sorted = words;
        sorted.sort_by_key(BinaryWord::len);
        for w in sorted {
            if !kept.iter().any(|k| k.is_prefix_of(&w)) {
                kept.push(w);
            }
        }
        kept.sort();
        Self { words: kept }
    }

    pub fn single(u: BinaryWord) -> Self {
        Self { words: vec![u] }
    }

    pub fn words(&self) -> &[BinaryWord] {
        &self.words
    }

    pub fn max_len(&self) -> usize {
        self.words.iter().map(BinaryWord::len).max().unwrap_or(0)
    }

    pub fn measure(&self, model: &MeasureModel) -> f64 {
        self.words.iter().map(|w| log_cylinder(model, w).prob()).sum()
    }

    /// Whether `T^k x` lies in the set.
    pub fn contains_shift(&self, x: &BinaryWord, k: usize) -> bool {
        self.words
            .iter()
            .any(|w| k + w.len() <= x.len() && x.bits()[k..k + w.len()] == *w.bits())
    }

    pub fn label(&self) -> String {
        self.words.iter().map(|w| w.to_string()).collect::<Vec<_>>().join("|")
    }
}

/// Visit frequency `(1/m) |{k < m : T^k x ∈ C}|` on a doubling grid up to `n`,
/// against target `μ(C)`.
pub fn visit_frequency(model: &MeasureModel, x: &BinaryWord, set: &CylinderSet, n: usize) -> Result<ConvergenceReport> {
    need_length(x, n + set.max_len(), "visit_frequency")?;
    let target = set.measure(model);
    let mut report = ConvergenceReport::new(format!("visit frequency of [{}]", set.label())).with_model(model.kind());
    let grid = doubling_grid_to(n);
    let mut hits = 0usize;
    let mut k = 0usize;
    for m in grid {
        while k < m {
            if set.contains_shift(x, k) {
                hits += 1;
            }
            k += 1;
        }
        report.push(m, hits as f64 / m as f64, Some(target));
    }
    Ok(report)
}

/// Birkhoff average of the indicator of `[u]`; see [`visit_frequency`].
pub fn birkhoff_average(model: &MeasureModel, x: &BinaryWord, u: &BinaryWord, n: usize) -> Result<ConvergenceReport> {
    visit_frequency(model, x, &CylinderSet::single(u.clone()), n)
}

/// Least `k ≤ budget` with `T^k x ∈ C`, or `None`.
pub fn first_visit(x: &BinaryWord, set: &CylinderSet, budget: usize) -> Result<Option<usize>> {
    need_length(x, budget + set.max_len(), "first_return")?;
    Ok((0..=budget).find(|&k| set.contains_shift(x, k)))
}

/// Least `k ≤ budget` with `x_k … x_{k+|u|−1} = u`, or `None`.
pub fn first_return(x: &BinaryWord, u: &BinaryWord, budget: usize) -> Result<Option<usize>> {
    first_visit(x, &CylinderSet::single(u.clone()), budget)
}

/// `g̃_N = max_{N ≤ k,j ≤ K} |f_k − f_j|` for each `N`, truncated at `K`.
pub fn gtilde_trace(profile: &FkProfile, n_grid: &[usize]) -> Vec<f64> {
    let v = &profile.values;
    // Suffix extremes make each entry O(1).
    let mut hi = v.clone();
    let mut lo = v.clone();
    for k in (0..v.len().saturating_sub(1)).rev() {
        hi[k] = hi[k].max(hi[k + 1]);
        lo[k] = lo[k].min(lo[k + 1]);
    }
    n_grid
        .iter()
        .map(|&n| if n < v.len() { hi[n] - lo[n] } else { 0.0 })
        .collect()
}

/// `g_N = max_{N ≤ k ≤ K} |f_k − f_K|`, with `f_K` standing in for the limit.
pub fn g_trace(profile: &FkProfile, n_grid: &[usize]) -> Vec<f64> {
    let v = &profile.values;
    let limit = profile.f_limit_estimate;
    n_grid
        .iter()
        .map(|&n| v.iter().skip(n).map(|f| (f - limit).abs()).fold(0.0, f64::max))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GtildeDiagnostic {
    /// Rows `(N, mean g̃_N, 0)` with standard errors.
    pub report: ConvergenceReport,
    pub k_max: usize,
    /// Every sampled path had `g̃_N` nonincreasing in `N`.
    pub pathwise_monotone: bool,
    /// Every sampled path had `g̃_N ≤ 2 f*`.
    pub pathwise_bounded: bool,
    /// Per-sample traces, in replica order.
    pub traces: Vec<Vec<f64>>,
}

/// Monte Carlo mean of the truncated `g̃_N` over sampled sequences.
pub fn gtilde_diagnostic(
    model: &MeasureModel,
    n_grid: &[usize],
    k_max: usize,
    n_samples: u64,
    n_prefix: usize,
    seed: u64,
) -> Result<GtildeDiagnostic> {
    if n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("N grid must be strictly increasing".into()));
    }
    if n_grid.last().is_some_and(|&n| n > k_max) {
        return Err(Error::InvalidArgument(format!("N grid exceeds K = {k_max}")));
    }
    if n_prefix < k_max + 1 {
        return Err(Error::InvalidArgument(format!("prefix length {n_prefix} < K + 1")));
    }
    let per_sample = try_fan_out(n_samples, |r| {
        let x = SampleRun::new(model, n_prefix, seed, r).sample()?;
        let profile = fk_profile(model, &x, k_max)?;
        let trace = gtilde_trace(&profile, n_grid);
        Ok::<_, Error>((trace, profile.f_star))
    })?;

    let pathwise_monotone = per_sample.iter().all(|(t, _)| t.windows(2).all(|w| w[1] <= w[0]));
    let pathwise_bounded = per_sample
        .iter()
        .all(|(t, f_star)| t.iter().all(|&g| g <= 2.0 * f_star));

    let mut report = ConvergenceReport::new(format!("gtilde_N truncated at K={k_max}"))
        .with_model(model.kind())
        .with_seed(seed, n_samples as usize);
    report.note(format!("sup over N <= k,j <= {k_max} (truncated)"));
    for (i, &n) in n_grid.iter().enumerate() {
        let est = Estimate::from_samples(per_sample.iter().map(|(t, _)| t[i]));
        report.push_row(n, est.mean, Some(0.0), Some(est.std_error));
    }
    Ok(GtildeDiagnostic {
        report,
        k_max,
        pathwise_monotone,
        pathwise_bounded,
        traces: per_sample.into_iter().map(|(t, _)| t).collect(),
    })
}

/// Monte Carlo mean of `f* = max_{k ≤ K} f_k`.
pub fn fstar_integral_estimate(model: &MeasureModel, k_max: usize, n_samples: u64, seed: u64) -> Result<Estimate> {
    let values = try_fan_out(n_samples, |r| {
        let x = SampleRun::new(model, k_max + 1, seed, r).sample()?;
        fk_profile(model, &x, k_max).map(|p| p.f_star)
    })?;
    Ok(Estimate::from_samples(values))
}

/// Monte Carlo mean of `f_k`; for `k ≥ 1` on a Markov model this is `h(μ)`.
pub fn fk_integral_estimate(model: &MeasureModel, k: usize, n_samples: u64, seed: u64) -> Result<Estimate> {
    let values = try_fan_out(n_samples, |r| {
        let x = SampleRun::new(model, k + 1, seed, r).sample()?;
        fk_profile(model, &x, k).map(|p| p.values[k])
    })?;
    Ok(Estimate::from_samples(values))
}
