//! Computable objects around the Shannon–McMillan–Breiman theorem for binary
//! sequences: cylinder measures, block entropies, conditional information
//! functions and their martingale, Birkhoff averages, and compression-based
//! complexity proxies.
//!
//! All logarithms are base 2 and every probability is carried as a
//! [`LogProb`].

pub mod complexity;
pub mod entropy;
pub mod error;
pub mod logprob;
pub mod measures;
pub mod montecarlo;
pub mod report;
pub mod sampler;
pub mod smb;
pub mod word;

pub use error::{Error, Result};
pub use logprob::LogProb;
pub use measures::{log_cylinder, MeasureModel};
pub use report::{ConvergenceReport, Estimate};
pub use sampler::{SampleRun, SplitMix64};
pub use word::{word, BinaryWord};
