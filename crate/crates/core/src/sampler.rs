//! Reproducible sampling of finite prefixes from a [`MeasureModel`].
//!
//! The generator is SplitMix64 with fixed constants so that every stream is
//! bit-identical across platforms. Bit `i` is `1` exactly when the `i`-th
//! uniform draw is below `μ(x_i = 1 | x_0 … x_{i-1})`.

use crate::error::{Error, Result};
use crate::measures::MeasureModel;
use crate::word::BinaryWord;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 output function applied to `z`.
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One SplitMix64 step from state `x`; used to derive replica streams.
pub fn mix64(x: u64) -> u64 {
    finalize(x.wrapping_add(GOLDEN_GAMMA))
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Stream for `replica` under `seed`: state `seed XOR mix64(replica)`.
    pub fn for_replica(seed: u64, replica: u64) -> Self {
        Self::new(seed ^ mix64(replica))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        finalize(self.state)
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// One reproducible draw: `(model, length, seed, replica)` determines the word.
#[derive(Debug, Clone, Copy)]
pub struct SampleRun<'m> {
    pub model: &'m MeasureModel,
    pub length: usize,
    pub seed: u64,
    pub replica: u64,
}

impl<'m> SampleRun<'m> {
    pub fn new(model: &'m MeasureModel, length: usize, seed: u64, replica: u64) -> Self {
        Self {
            model,
            length,
            seed,
            replica,
        }
    }

    pub fn sample(&self) -> Result<BinaryWord> {
        sample_prefix(self)
    }
}

/// Draws a prefix of length `run.length`.
///
/// Mixtures spend one extra uniform up front to choose the component, then
/// sample that component for the whole run.
pub fn sample_prefix(run: &SampleRun<'_>) -> Result<BinaryWord> {
    let mut rng = SplitMix64::for_replica(run.seed, run.replica);
    let model = match run.model {
        MeasureModel::Mixture { weights, components } => {
            let u = rng.next_f64();
            let mut acc = 0.0;
            let idx = weights
                .iter()
                .position(|w| {
                    acc += w;
                    u < acc
                })
                .unwrap_or(components.len() - 1);
            &components[idx]
        }
        m => m,
    };
    sample_with(model, run.length, &mut rng)
}

fn sample_with(model: &MeasureModel, n: usize, rng: &mut SplitMix64) -> Result<BinaryWord> {
    let mut out = BinaryWord::with_capacity(n);
    let mut cursor = model.cursor();
    for _ in 0..n {
        let p1 = cursor
            .conditional(1)
            .ok_or_else(|| Error::ConditioningOnNull { word: out.clone() })?
            .prob();
        let bit = u8::from(rng.next_f64() < p1);
        cursor.push(bit);
        out.push(bit);
    }
    Ok(out)
}

/// Deterministic sequences used as non-random controls.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Adversarial {
    AllZeros,
    Periodic(BinaryWord),
    /// Alias for the Bernoulli(1/2) sample with seed 0, replica 0.
    FixedSeedCoinflips,
}

pub fn adversarial_sequence(kind: &Adversarial, n: usize) -> Result<BinaryWord> {
    match kind {
        Adversarial::AllZeros => Ok(BinaryWord::from_bits(std::iter::repeat_n(0, n))),
        Adversarial::Periodic(pattern) => {
            if pattern.is_empty() {
                return Err(Error::InvalidArgument("periodic pattern must be nonempty".into()));
            }
            Ok(pattern.iter().cycle().take(n).collect())
        }
        Adversarial::FixedSeedCoinflips => {
            let fair = MeasureModel::Bernoulli { p: 0.5 };
            sample_prefix(&SampleRun::new(&fair, n, 0, 0))
        }
    }
}
