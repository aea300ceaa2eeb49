//! Structural checks: shift-invariance by exhaustive enumeration and the
//! Cesàro correlation criterion for ergodicity.

use serde::Serialize;

use super::{log_cylinder, Cursor, MeasureModel};
use crate::error::{Error, Result};
use crate::montecarlo::try_fan_out;
use crate::report::{ConvergenceReport, Estimate};
use crate::sampler::SampleRun;
use crate::word::BinaryWord;

const MAX_INVARIANCE_DEPTH: usize = 22;

/// Outcome of a finite check. Failures are reported here, not raised.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub passed: bool,
    pub items_checked: usize,
    pub tolerance: f64,
    pub worst_violation: f64,
    pub worst_word: Option<BinaryWord>,
    /// Shortest violating word, lexicographically least among those.
    pub first_failure: Option<BinaryWord>,
    pub warnings: Vec<String>,
}

/// Verifies `μ[0w] + μ[1w] = μ[w]` for every `|w| ≤ depth`.
///
/// Sums are formed in log space and compared in linear space.
pub fn check_shift_invariance(model: &MeasureModel, depth: usize, tol: f64) -> Result<CheckReport> {
    if depth > MAX_INVARIANCE_DEPTH {
        return Err(Error::BudgetExceeded {
            what: "invariance depth",
            requested: depth,
            limit: MAX_INVARIANCE_DEPTH,
        });
    }
    let mut report = CheckReport {
        check: format!("shift invariance to depth {depth}"),
        passed: true,
        items_checked: 0,
        tolerance: tol,
        worst_violation: 0.0,
        worst_word: None,
        first_failure: None,
        warnings: Vec::new(),
    };
    if model.is_periodic() {
        report.warnings.push("periodic chain: stationary but not mixing".into());
    }

    let root = model.cursor();
    let (zero, one) = (root.child(0), root.child(1));
    let mut w = BinaryWord::empty();
    visit_invariance(&mut report, &mut w, &root, &zero, &one, depth);
    Ok(report)
}

fn visit_invariance(
    report: &mut CheckReport,
    w: &mut BinaryWord,
    here: &Cursor<'_>,
    zero: &Cursor<'_>,
    one: &Cursor<'_>,
    depth: usize,
) {
    let split = zero.log_prob().log_sum_exp(one.log_prob()).prob();
    let violation = (split - here.log_prob().prob()).abs();
    report.items_checked += 1;
    if violation > report.worst_violation {
        report.worst_violation = violation;
        report.worst_word = Some(w.clone());
    }
    // Preorder visits equal-length words lexicographically, so only length decides.
    if (violation.is_nan() || violation >= report.tolerance)
        && report.first_failure.as_ref().is_none_or(|f| w.len() < f.len())
    {
        report.first_failure = Some(w.clone());
        report.passed = false;
    }
    if w.len() == depth {
        return;
    }
    for b in [0u8, 1] {
        w.push(b);
        visit_invariance(report, w, &here.child(b), &zero.child(b), &one.child(b), depth);
        w.truncate(w.len() - 1);
    }
}

/// `μ([u] ∩ T^{-k}[v])`, computed exactly for every model family.
pub fn cylinder_overlap_measure(model: &MeasureModel, u: &BinaryWord, v: &BinaryWord, k: usize) -> f64 {
    if u.is_empty() {
        return log_cylinder(model, v).prob();
    }
    if k < u.len() {
        // v starts inside u: the event is a single cylinder or empty.
        let overlap = (u.len() - k).min(v.len());
        if (0..overlap).any(|i| u[k + i] != v[i]) {
            return 0.0;
        }
        let joined = u.concat(&v.shifted(overlap));
        return log_cylinder(model, &joined).prob();
    }
    if v.is_empty() {
        return log_cylinder(model, u).prob();
    }
    let gap = k - u.len();
    match model {
        MeasureModel::Bernoulli { .. } => log_cylinder(model, u).prob() * log_cylinder(model, v).prob(),
        MeasureModel::Markov { pi, transition } => {
            let first = v[0] as usize;
            if pi[first] == 0.0 {
                return 0.0;
            }
            // Row u_last of P^{gap+1}.
            let mut row = [0.0; 2];
            row[u.last().unwrap() as usize] = 1.0;
            for _ in 0..=gap {
                row = [
                    row[0] * transition[0][0] + row[1] * transition[1][0],
                    row[0] * transition[0][1] + row[1] * transition[1][1],
                ];
            }
            log_cylinder(model, u).prob() * row[first] * log_cylinder(model, v).prob() / pi[first]
        }
        MeasureModel::HiddenMarkov { transition, emit, .. } => {
            let mut c = Cursor::new(model);
            c.extend(u);
            if c.is_null() {
                return 0.0;
            }
            let mut dist = c.hidden_prediction().expect("hidden cursor").to_vec();
            for _ in 0..gap {
                let mut next = vec![0.0; dist.len()];
                for (from, &p) in dist.iter().enumerate() {
                    for (to, q) in transition[from].iter().enumerate() {
                        next[to] += p * q;
                    }
                }
                dist = next;
            }
            // Probability of emitting v from hidden distribution `dist`.
            let mut mass = 1.0;
            for (t, b) in v.iter().enumerate() {
                let mut norm = 0.0;
                for (p, &e) in dist.iter_mut().zip(emit) {
                    if e != b {
                        *p = 0.0;
                    }
                    norm += *p;
                }
                mass *= norm;
                if norm == 0.0 {
                    return 0.0;
                }
                if t + 1 < v.len() {
                    let mut next = vec![0.0; dist.len()];
                    for (from, &p) in dist.iter().enumerate() {
                        for (to, q) in transition[from].iter().enumerate() {
                            next[to] += p / norm * q;
                        }
                    }
                    dist = next;
                }
            }
            c.log_prob().prob() * mass
        }
        MeasureModel::Mixture { weights, components } => weights
            .iter()
            .zip(components)
            .map(|(w, m)| w * cylinder_overlap_measure(m, u, v, k))
            .sum(),
    }
}

/// Cesàro means `c_m = (1/m) Σ_{k<m} μ([u] ∩ T^{-k}[v])` for `m = 1..=n`,
/// with target `μ[u]·μ[v]`. Exact for every model family.
pub fn correlation_cesaro(model: &MeasureModel, u: &BinaryWord, v: &BinaryWord, n: usize) -> ConvergenceReport {
    let target = log_cylinder(model, u).prob() * log_cylinder(model, v).prob();
    let mut report = ConvergenceReport::new(format!("cesaro correlation u={u} v={v}")).with_model(model.kind());
    report.note("exact");
    let mut acc = 0.0;
    for k in 0..n {
        acc += cylinder_overlap_measure(model, u, v, k);
        report.push(k + 1, acc / (k + 1) as f64, Some(target));
    }
    report
}

/// Monte Carlo version of [`correlation_cesaro`] over `samples` sampled
/// sequences; each row carries its standard error.
pub fn correlation_cesaro_mc(
    model: &MeasureModel,
    u: &BinaryWord,
    v: &BinaryWord,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<ConvergenceReport> {
    let target = log_cylinder(model, u).prob() * log_cylinder(model, v).prob();
    let len = u.len().max((n + v.len()).saturating_sub(1));
    let paths = try_fan_out(samples, |r| {
        let x = SampleRun::new(model, len, seed, r).sample()?;
        let mut means = vec![0.0; n];
        if u.is_prefix_of(&x) {
            let mut hits = 0usize;
            for (k, mean) in means.iter_mut().enumerate() {
                if x.bits()[k..k + v.len()] == *v.bits() {
                    hits += 1;
                }
                *mean = hits as f64 / (k + 1) as f64;
            }
        }
        Ok::<_, Error>(means)
    })?;

    let mut report = ConvergenceReport::new(format!("cesaro correlation u={u} v={v}"))
        .with_model(model.kind())
        .with_seed(seed, samples as usize);
    report.note("monte carlo");
    for m in 0..n {
        let est = Estimate::from_samples(paths.iter().map(|p| p[m]));
        report.push_row(m + 1, est.mean, Some(target), Some(est.std_error));
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErgodicityVerdict {
    ConsistentWithErgodicity,
    InconsistentWithErgodicity,
}

/// Labels a correlation report by whether its last row is within `tol` of
/// `μ[u]·μ[v]`. Finitely many pairs cannot decide ergodicity.
pub fn ergodicity_verdict(report: &ConvergenceReport, tol: f64) -> ErgodicityVerdict {
    match report.last().and_then(|r| r.abs_error) {
        Some(e) if e < tol => ErgodicityVerdict::ConsistentWithErgodicity,
        _ => ErgodicityVerdict::InconsistentWithErgodicity,
    }
}
