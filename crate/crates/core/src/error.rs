use thiserror::Error;

use crate::word::BinaryWord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A conditional probability was requested given a cylinder of measure zero.
    #[error("conditioning on a null cylinder [{word}]")]
    ConditioningOnNull { word: BinaryWord },

    /// A code length was requested for a word of probability zero.
    #[error("cylinder [{word}] has measure zero")]
    NullCylinder { word: BinaryWord },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("budget exceeded: {what} = {requested} > {limit}")]
    BudgetExceeded {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("no closed-form entropy for {0} models")]
    NoClosedForm(&'static str),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
