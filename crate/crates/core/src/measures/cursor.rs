use super::MeasureModel;
use crate::logprob::{log_sum_exp, LogProb};
use crate::word::BinaryWord;

/// Incremental evaluation of `log2 μ[w]` as `w` grows one bit at a time.
///
/// Cloning a cursor forks the computation; this is how cylinder trees are
/// enumerated without recomputing shared prefixes.
#[derive(Debug, Clone)]
pub struct Cursor<'m> {
    model: &'m MeasureModel,
    len: usize,
    log_prob: LogProb,
    state: State<'m>,
}

#[derive(Debug, Clone)]
enum State<'m> {
    Bernoulli,
    Markov {
        last: Option<u8>,
    },
    /// Predictive distribution of the next hidden state, normalized to sum 1.
    Hidden {
        predicted: Vec<f64>,
    },
    Mixture {
        log_weights: Vec<f64>,
        parts: Vec<Cursor<'m>>,
    },
}

impl<'m> Cursor<'m> {
    pub fn new(model: &'m MeasureModel) -> Self {
        let state = match model {
            MeasureModel::Bernoulli { .. } => State::Bernoulli,
            MeasureModel::Markov { .. } => State::Markov { last: None },
            MeasureModel::HiddenMarkov { pi, .. } => State::Hidden { predicted: pi.clone() },
            MeasureModel::Mixture { weights, components } => State::Mixture {
                log_weights: weights.iter().map(|w| w.log2()).collect(),
                parts: components.iter().map(Cursor::new).collect(),
            },
        };
        Cursor {
            model,
            len: 0,
            log_prob: LogProb::ONE,
            state,
        }
    }

    pub fn model(&self) -> &'m MeasureModel {
        self.model
    }

    /// Length of the word consumed so far.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `log2 μ[w]` for the word consumed so far.
    pub fn log_prob(&self) -> LogProb {
        self.log_prob
    }

    pub fn is_null(&self) -> bool {
        self.log_prob.is_null()
    }

    /// `log2 μ[w·b] − log2 μ[w]`, or `None` if `μ[w] = 0`.
    pub fn conditional(&self, b: u8) -> Option<LogProb> {
        if self.is_null() {
            return None;
        }
        Some(self.conditional_unchecked(b))
    }

    fn conditional_unchecked(&self, b: u8) -> LogProb {
        match (&self.state, self.model) {
            (State::Bernoulli, MeasureModel::Bernoulli { p }) => LogProb::from_prob(if b == 1 { *p } else { 1.0 - p }),
            (State::Markov { last }, MeasureModel::Markov { pi, transition }) => {
                let q = match last {
                    None => pi[b as usize],
                    Some(a) => transition[*a as usize][b as usize],
                };
                LogProb::from_prob(q)
            }
            (State::Hidden { predicted }, MeasureModel::HiddenMarkov { emit, .. }) => {
                let mass: f64 = predicted
                    .iter()
                    .zip(emit)
                    .filter(|(_, &e)| e == b)
                    .map(|(p, _)| p)
                    .sum();
                LogProb::from_prob(mass)
            }
            (State::Mixture { log_weights, parts }, _) => {
                let joint = log_sum_exp(log_weights.iter().zip(parts).map(|(lw, c)| {
                    if c.is_null() {
                        f64::NEG_INFINITY
                    } else {
                        lw + c.log_prob.0 + c.conditional_unchecked(b).0
                    }
                }));
                LogProb(joint.0 - self.log_prob.0)
            }
            _ => unreachable!("cursor state does not match its model"),
        }
    }

    /// Appends bit `b`. Pushing into a null cylinder keeps it null.
    pub fn push(&mut self, b: u8) {
        let b = u8::from(b != 0);
        self.len += 1;
        if self.is_null() {
            return;
        }
        match (&mut self.state, self.model) {
            (State::Bernoulli, MeasureModel::Bernoulli { p }) => {
                let q = if b == 1 { *p } else { 1.0 - *p };
                self.log_prob = self.log_prob + LogProb::from_prob(q);
            }
            (State::Markov { last }, MeasureModel::Markov { pi, transition }) => {
                let q = match last {
                    None => pi[b as usize],
                    Some(a) => transition[*a as usize][b as usize],
                };
                *last = Some(b);
                self.log_prob = self.log_prob + LogProb::from_prob(q);
            }
            (State::Hidden { predicted }, MeasureModel::HiddenMarkov { transition, emit, .. }) => {
                // Filter on the observed bit, renormalize, then predict one step.
                let mut norm = 0.0;
                for (p, &e) in predicted.iter_mut().zip(emit) {
                    if e != b {
                        *p = 0.0;
                    }
                    norm += *p;
                }
                if norm <= 0.0 {
                    self.log_prob = LogProb::ZERO;
                    return;
                }
                self.log_prob = self.log_prob + LogProb::from_prob(norm);
                let m = predicted.len();
                let mut next = vec![0.0; m];
                for (from, &p) in predicted.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    let w = p / norm;
                    for (to, q) in transition[from].iter().enumerate() {
                        next[to] += w * q;
                    }
                }
                *predicted = next;
            }
            (State::Mixture { log_weights, parts }, _) => {
                for c in parts.iter_mut() {
                    c.push(b);
                }
                self.log_prob = log_sum_exp(log_weights.iter().zip(parts.iter()).map(|(lw, c)| lw + c.log_prob.0));
            }
            _ => unreachable!("cursor state does not match its model"),
        }
    }

    pub fn extend(&mut self, w: &BinaryWord) {
        for b in w.iter() {
            self.push(b);
        }
    }

    /// A copy of this cursor advanced by one bit.
    pub fn child(&self, b: u8) -> Self {
        let mut c = self.clone();
        c.push(b);
        c
    }

    /// Predictive hidden-state distribution (hidden-Markov cursors only).
    pub(crate) fn hidden_prediction(&self) -> Option<&[f64]> {
        match &self.state {
            State::Hidden { predicted } => Some(predicted),
            _ => None,
        }
    }
}
