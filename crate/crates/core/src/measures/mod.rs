//! Shift-invariant measures on `{0,1}^ℕ`, given by exact cylinder log-probabilities.
//!
//! Four closed families are supported: Bernoulli, stationary two-state Markov,
//! stationary hidden-Markov with deterministic binary emissions, and finite
//! mixtures of the other three (the standard non-ergodic example).

mod checks;
mod cursor;
mod file;
mod stationary;

pub use checks::{
    check_shift_invariance, correlation_cesaro, correlation_cesaro_mc, cylinder_overlap_measure, ergodicity_verdict,
    CheckReport, ErgodicityVerdict,
};
pub use cursor::Cursor;
pub use file::{parse_model_file, ModelFile};
pub use stationary::{chain_period, stationary_distribution};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logprob::LogProb;
use crate::word::BinaryWord;

pub(crate) const SUM_TOL: f64 = 1e-12;
pub(crate) const STATIONARITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MeasureModel {
    /// i.i.d. bits with `P(1) = p`.
    Bernoulli { p: f64 },
    /// Two-state chain on the observed bits, started from `pi`.
    Markov { pi: [f64; 2], transition: [[f64; 2]; 2] },
    /// Hidden chain over `pi.len()` states; state `s` emits `emit[s]`.
    HiddenMarkov {
        pi: Vec<f64>,
        transition: Vec<Vec<f64>>,
        emit: Vec<u8>,
    },
    /// Convex combination of non-mixture components.
    Mixture {
        weights: Vec<f64>,
        components: Vec<MeasureModel>,
    },
}

impl MeasureModel {
    pub fn bernoulli(p: f64) -> Result<Self> {
        let m = MeasureModel::Bernoulli { p };
        m.validate()?;
        Ok(m)
    }

    /// Markov chain started from its stationary distribution.
    pub fn markov(transition: [[f64; 2]; 2]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = transition.iter().map(|r| r.to_vec()).collect();
        let pi = stationary_distribution(&rows)?;
        Self::markov_with_stationary([pi[0], pi[1]], transition)
    }

    pub fn markov_with_stationary(pi: [f64; 2], transition: [[f64; 2]; 2]) -> Result<Self> {
        let m = MeasureModel::Markov { pi, transition };
        m.validate()?;
        Ok(m)
    }

    /// Hidden-Markov model started from the stationary distribution of `transition`.
    pub fn hidden_markov(transition: Vec<Vec<f64>>, emit: Vec<u8>) -> Result<Self> {
        let pi = stationary_distribution(&transition)?;
        Self::hidden_markov_with_stationary(pi, transition, emit)
    }

    pub fn hidden_markov_with_stationary(pi: Vec<f64>, transition: Vec<Vec<f64>>, emit: Vec<u8>) -> Result<Self> {
        let m = MeasureModel::HiddenMarkov { pi, transition, emit };
        m.validate()?;
        Ok(m)
    }

    pub fn mixture(weights: Vec<f64>, components: Vec<MeasureModel>) -> Result<Self> {
        let m = MeasureModel::Mixture { weights, components };
        m.validate()?;
        Ok(m)
    }

    /// A persistent binary regime observed through a memoryless bit-flip channel.
    ///
    /// The regime `r ∈ {0,1}` stays put with probability `stay`; each emitted bit
    /// is `r` flipped with probability `flip`. Encoded with four hidden states
    /// `(r, flipped)` so that emissions are deterministic.
    pub fn noisy_regime(stay: f64, flip: f64) -> Result<Self> {
        let regime = [[stay, 1.0 - stay], [1.0 - stay, stay]];
        let noise = [1.0 - flip, flip];
        let mut transition = vec![vec![0.0; 4]; 4];
        for (from, row) in transition.iter_mut().enumerate() {
            for (to, entry) in row.iter_mut().enumerate() {
                *entry = regime[from / 2][to / 2] * noise[to % 2];
            }
        }
        let emit = (0..4).map(|s| ((s / 2) ^ (s % 2)) as u8).collect();
        Self::hidden_markov(transition, emit)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MeasureModel::Bernoulli { .. } => "bernoulli",
            MeasureModel::Markov { .. } => "markov",
            MeasureModel::HiddenMarkov { .. } => "hidden_markov",
            MeasureModel::Mixture { .. } => "mixture",
        }
    }

    /// Checks the probability-vector, row-stochastic and stationarity invariants.
    pub fn validate(&self) -> Result<()> {
        match self {
            MeasureModel::Bernoulli { p } => check_probability("p", *p),
            MeasureModel::Markov { pi, transition } => {
                check_distribution("pi", pi)?;
                for (i, row) in transition.iter().enumerate() {
                    check_distribution(&format!("row {i} of P"), row)?;
                }
                let rows: Vec<Vec<f64>> = transition.iter().map(|r| r.to_vec()).collect();
                check_stationary(pi, &rows)
            }
            MeasureModel::HiddenMarkov { pi, transition, emit } => {
                let m = pi.len();
                if m == 0 {
                    return Err(Error::InvalidModel("hidden_markov needs at least one state".into()));
                }
                if transition.len() != m || emit.len() != m {
                    return Err(Error::InvalidModel(format!(
                        "hidden_markov: pi has {m} states but Q has {} rows and emit has {} entries",
                        transition.len(),
                        emit.len()
                    )));
                }
                check_distribution("pi", pi)?;
                for (i, row) in transition.iter().enumerate() {
                    if row.len() != m {
                        return Err(Error::InvalidModel(format!(
                            "row {i} of Q has {} entries, expected {m}",
                            row.len()
                        )));
                    }
                    check_distribution(&format!("row {i} of Q"), row)?;
                }
                if let Some(s) = emit.iter().position(|&e| e > 1) {
                    return Err(Error::InvalidModel(format!("emit[{s}] = {} is not a bit", emit[s])));
                }
                check_stationary(pi, transition)
            }
            MeasureModel::Mixture { weights, components } => {
                if weights.len() != components.len() || weights.is_empty() {
                    return Err(Error::InvalidModel(format!(
                        "mixture has {} weights for {} components",
                        weights.len(),
                        components.len()
                    )));
                }
                check_distribution("weights", weights)?;
                for (i, c) in components.iter().enumerate() {
                    if matches!(c, MeasureModel::Mixture { .. }) {
                        return Err(Error::InvalidModel(format!(
                            "component {i} is a mixture; nesting is not supported"
                        )));
                    }
                    c.validate()
                        .map_err(|e| Error::InvalidModel(format!("component {i}: {e}")))?;
                }
                Ok(())
            }
        }
    }

    /// Fresh cursor positioned at the empty word.
    pub fn cursor(&self) -> Cursor<'_> {
        Cursor::new(self)
    }

    /// Periodic hidden or observed chains are stationary but do not mix.
    pub fn is_periodic(&self) -> bool {
        match self {
            MeasureModel::Bernoulli { .. } => false,
            MeasureModel::Markov { transition, .. } => {
                let rows: Vec<Vec<f64>> = transition.iter().map(|r| r.to_vec()).collect();
                chain_period(&rows) > 1
            }
            MeasureModel::HiddenMarkov { transition, .. } => chain_period(transition) > 1,
            MeasureModel::Mixture { components, .. } => components.iter().any(Self::is_periodic),
        }
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidModel(format!("{name} = {p} is not in [0,1]")));
    }
    Ok(())
}

fn check_distribution(name: &str, v: &[f64]) -> Result<()> {
    for (i, &x) in v.iter().enumerate() {
        check_probability(&format!("{name}[{i}]"), x)?;
    }
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidModel(format!("{name} sums to {s}, not 1")));
    }
    Ok(())
}

fn check_stationary(pi: &[f64], rows: &[Vec<f64>]) -> Result<()> {
    let residual = stationary::residual(pi, rows);
    if residual > STATIONARITY_TOL {
        return Err(Error::InvalidModel(format!(
            "initial distribution is not stationary (‖πP − π‖∞ = {residual:e})"
        )));
    }
    Ok(())
}

/// `log2 μ[w]`; `μ[ε] = 1` and null cylinders give `−∞`.
pub fn log_cylinder(model: &MeasureModel, w: &BinaryWord) -> LogProb {
    match model {
        MeasureModel::Bernoulli { p } => {
            let ones = w.count_ones();
            let zeros = w.len() - ones;
            let term = |count: usize, q: f64| {
                if count == 0 {
                    LogProb::ONE
                } else {
                    LogProb(count as f64 * q.log2())
                }
            };
            term(ones, *p) + term(zeros, 1.0 - p)
        }
        _ => {
            let mut c = model.cursor();
            c.extend(w);
            c.log_prob()
        }
    }
}

/// `log2 μ[w·b] − log2 μ[w]`.
pub fn conditional_next_logprob(model: &MeasureModel, w: &BinaryWord, b: u8) -> Result<LogProb> {
    let mut c = model.cursor();
    c.extend(w);
    c.conditional(b)
        .ok_or_else(|| Error::ConditioningOnNull { word: w.clone() })
}
