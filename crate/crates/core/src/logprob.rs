//! Base-2 log-probabilities.

use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

/// `log2` of a probability, in `[−∞, 0]`. `−∞` is probability zero.
///
/// Adding two values multiplies the probabilities; [`LogProb::log_sum_exp`]
/// adds them without leaving log space.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogProb(pub f64);

impl LogProb {
    pub const ONE: LogProb = LogProb(0.0);
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);

    pub fn from_prob(p: f64) -> Self {
        LogProb(p.log2())
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Back to linear space. Underflows to 0 below about `−1074`.
    pub fn prob(self) -> f64 {
        self.0.exp2()
    }

    pub fn is_null(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// Information content `−log2 p` in bits.
    pub fn bits(self) -> f64 {
        -self.0
    }

    /// `log2(2^a + 2^b)`.
    pub fn log_sum_exp(self, other: LogProb) -> LogProb {
        let (hi, lo) = if self.0 >= other.0 {
            (self.0, other.0)
        } else {
            (other.0, self.0)
        };
        if hi == f64::NEG_INFINITY {
            return LogProb::ZERO;
        }
        LogProb(hi + (lo - hi).exp2().ln_1p() / std::f64::consts::LN_2)
    }

    pub fn sum<I: IntoIterator<Item = LogProb>>(terms: I) -> LogProb {
        log_sum_exp(terms.into_iter().map(|t| t.0))
    }
}

impl Add for LogProb {
    type Output = LogProb;

    /// Product of probabilities. `−∞` is absorbing.
    fn add(self, rhs: LogProb) -> LogProb {
        if self.is_null() || rhs.is_null() {
            LogProb::ZERO
        } else {
            LogProb(self.0 + rhs.0)
        }
    }
}

impl Sub for LogProb {
    type Output = f64;

    /// Log of a ratio. Not a `LogProb` since the ratio may exceed one.
    fn sub(self, rhs: LogProb) -> f64 {
        self.0 - rhs.0
    }
}

/// `log2 Σ 2^{x_i}` with max-shift; returns `−∞` for an empty or all-null input.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(terms: I) -> LogProb {
    let terms: Vec<f64> = terms.into_iter().collect();
    let hi = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return LogProb::ZERO;
    }
    let s: f64 = terms.iter().map(|&t| (t - hi).exp2()).sum();
    LogProb(hi + s.log2())
}

/// `x log2 x` with the convention `0 log 0 = 0`.
pub fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_of_halves() {
        let half = LogProb::from_prob(0.5);
        assert!((half.log_sum_exp(half).value()).abs() < 1e-15);
    }

    #[test]
    fn null_is_absorbing() {
        assert!((LogProb::ZERO + LogProb(-3.0)).is_null());
        assert_eq!(LogProb::ZERO.log_sum_exp(LogProb(-3.0)), LogProb(-3.0));
        assert!(LogProb::ZERO.log_sum_exp(LogProb::ZERO).is_null());
    }

    #[test]
    fn lse_without_underflow_at_large_magnitude() {
        // 2^-1e7 + 2^-1e7 = 2^(-1e7 + 1), far below f64 range in linear space.
        let a = LogProb(-1.0e7);
        let s = a.log_sum_exp(a);
        assert!((s.value() - (-1.0e7 + 1.0)).abs() < 1e-6);
        let t = log_sum_exp([-1.0e7, -1.0e7 - 1.0]);
        assert!((t.value() - (-1.0e7 + (1.5f64).log2())).abs() < 1e-6);
    }

    #[test]
    fn zero_log_zero() {
        assert_eq!(xlog2x(0.0), 0.0);
        assert_eq!(xlog2x(1.0), 0.0);
        assert!((xlog2x(0.5) + 0.5).abs() < 1e-15);
    }
}
