//! JSON model files.
//!
//! ```json
//! {"type": "markov", "P": [["0.9", "0.1"], ["0.5", "0.5"]]}
//! ```
//!
//! Probabilities may be decimal strings or JSON numbers. `pi` is optional for
//! `markov` and `hidden_markov`; when absent it is the stationary distribution.

use serde::Deserialize;

use super::{stationary_distribution, MeasureModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
/// A probability written either as a decimal string or a JSON number.
#[serde(untagged)]
pub enum Number {
    Text(String),
    Float(f64),
}

impl Number {
    fn value(&self, field: &str) -> Result<f64> {
        match self {
            Number::Float(x) => Ok(*x),
            Number::Text(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::InvalidModel(format!("{field}: {s:?} is not a decimal number"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelFile {
    Bernoulli {
        p: Number,
    },
    Markov {
        #[serde(rename = "P")]
        transition: Vec<Vec<Number>>,
        #[serde(default)]
        pi: Option<Vec<Number>>,
    },
    HiddenMarkov {
        #[serde(rename = "Q")]
        transition: Vec<Vec<Number>>,
        emit: Vec<u8>,
        #[serde(default)]
        pi: Option<Vec<Number>>,
    },
    Mixture {
        weights: Vec<Number>,
        components: Vec<ModelFile>,
    },
}

fn vector(field: &str, v: &[Number]) -> Result<Vec<f64>> {
    v.iter()
        .enumerate()
        .map(|(i, x)| x.value(&format!("{field}[{i}]")))
        .collect()
}

fn matrix(field: &str, rows: &[Vec<Number>]) -> Result<Vec<Vec<f64>>> {
    let m: Vec<Vec<f64>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| vector(&format!("{field}[{i}]"), r))
        .collect::<Result<_>>()?;
    for (i, row) in m.iter().enumerate() {
        if row.len() != m.len() {
            return Err(Error::InvalidModel(format!(
                "row {i} of {field} has {} entries, expected {}",
                row.len(),
                m.len()
            )));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > super::SUM_TOL {
            return Err(Error::InvalidModel(format!("row {i} of {field} sums to {s}, not 1")));
        }
    }
    Ok(m)
}

impl ModelFile {
    pub fn into_model(self) -> Result<MeasureModel> {
        match self {
            ModelFile::Bernoulli { p } => MeasureModel::bernoulli(p.value("p")?),
            ModelFile::Markov { transition, pi } => {
                let rows = matrix("P", &transition)?;
                if rows.len() != 2 {
                    return Err(Error::InvalidModel(format!(
                        "markov P must be 2×2, got {} rows",
                        rows.len()
                    )));
                }
                let pi = match pi {
                    Some(pi) => vector("pi", &pi)?,
                    None => stationary_distribution(&rows)?,
                };
                if pi.len() != 2 {
                    return Err(Error::InvalidModel("markov pi must have 2 entries".into()));
                }
                MeasureModel::markov_with_stationary(
                    [pi[0], pi[1]],
                    [[rows[0][0], rows[0][1]], [rows[1][0], rows[1][1]]],
                )
            }
            ModelFile::HiddenMarkov { transition, emit, pi } => {
                let rows = matrix("Q", &transition)?;
                let pi = match pi {
                    Some(pi) => vector("pi", &pi)?,
                    None => stationary_distribution(&rows)?,
                };
                MeasureModel::hidden_markov_with_stationary(pi, rows, emit)
            }
            ModelFile::Mixture { weights, components } => {
                let weights = vector("weights", &weights)?;
                let components = components
                    .into_iter()
                    .enumerate()
                    .map(|(i, c)| match c {
                        ModelFile::Mixture { .. } => Err(Error::InvalidModel(format!(
                            "component {i} is a mixture; nesting is not supported"
                        ))),
                        c => c.into_model(),
                    })
                    .collect::<Result<Vec<_>>>()?;
                MeasureModel::mixture(weights, components)
            }
        }
    }
}

/// Parses and validates a model file.
pub fn parse_model_file(text: &str) -> Result<MeasureModel> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| Error::InvalidModel(format!("malformed model file: {e}")))?;
    file.into_model()
}
