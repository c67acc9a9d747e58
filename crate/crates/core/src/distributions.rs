//! Seeded generation of extremely heavy-tailed Pareto samples.
//!
//! The model distribution is F(x) = 1 - 1/x^alpha on [1, inf) with tail
//! index alpha in (0, 2]; the mean is infinite for alpha <= 1 and the
//! variance is infinite for alpha <= 2. Sampling is inverse-transform on
//! a counter-style ChaCha stream so that every (base seed, trial index)
//! pair yields a bit-identical sample, independently of all other trials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TailixError};
use crate::sample::Sample;

/// Pareto law with unit scale: F(x) = 1 - x^(-alpha) for x >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoLaw {
    alpha: f64,
}

impl ParetoLaw {
    /// Creates a law with tail index `alpha` in (0, 2].
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || alpha > 2.0 {
            return Err(TailixError::invalid(
                "alpha",
                format!("tail index must lie in (0, 2], got {alpha}"),
            ));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Distribution function F(x) = 1 - x^(-alpha), zero below the support.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 1.0 {
            0.0
        } else {
            1.0 - x.powf(-self.alpha)
        }
    }

    /// Quantile x with F(x) = u, i.e. (1 - u)^(-1/alpha).
    ///
    /// Strictly increasing in `u`; u = 0 maps to the support endpoint 1.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(TailixError::invalid(
                "u",
                format!("probability must lie in [0, 1), got {u}"),
            ));
        }
        Ok((1.0 - u).powf(-1.0 / self.alpha))
    }
}

/// Identifies one deterministic substream of draws.
///
/// The same (base_seed, trial_index) always reproduces the same stream;
/// distinct trial indices select independent ChaCha streams, so parallel
/// trials never share state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub base_seed: u64,
    pub trial_index: u64,
}

impl SeedSpec {
    pub fn new(base_seed: u64, trial_index: u64) -> Self {
        Self {
            base_seed,
            trial_index,
        }
    }

    /// The generator positioned at this substream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base_seed);
        rng.set_stream(self.trial_index);
        rng
    }
}

/// Draws `n` i.i.d. observations from `law` via inverse transform.
///
/// Uniform variates live in [0, 1), so the u -> 1 singularity of the
/// quantile map is never hit and every draw is finite and >= 1.
pub fn sample_pareto(law: ParetoLaw, n: usize, seed: SeedSpec) -> Result<Sample> {
    if n == 0 {
        return Err(TailixError::invalid("n", "sample size must be at least 1"));
    }
    let mut rng = seed.rng();
    let inv = -1.0 / law.alpha();
    let values = (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            (1.0 - u).powf(inv)
        })
        .collect();
    Sample::new(values)
}
