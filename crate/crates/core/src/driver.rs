//! The environment driving system: a two-sided, integer-indexed,
//! reproducible source of band rates with exact shift maps.
//!
//! Three flavors: a constant environment, a periodic block sequence, and a
//! seeded-random environment. Random rates come from a keyed counter-based
//! mixing of `(seed, index, slot)`, so any index — negative ones included —
//! is addressable in O(1) and querying it twice is bit-identical. Shifts
//! are pure offset bookkeeping, never re-seeding, so the group property
//! `shift(shift(d, a), b) = shift(d, a + b)` holds exactly.

use crate::chain::{
    build_generator, build_transition, BandParameters, RateBounds, TransitionMatrix,
};
use crate::error::{Error, Result};

/// How random drivers draw each rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateDistribution {
    /// Independent uniform on `[alpha, beta]` per rate per time step.
    Uniform,
    /// Independent fair coin on the two extremes `{alpha, beta}`.
    TwoPoint,
}

#[derive(Debug, Clone, PartialEq)]
enum DriverKind {
    Constant(BandParameters),
    Periodic(Vec<BandParameters>),
    Random {
        seed: u64,
        distribution: RateDistribution,
    },
}

/// A reproducible bi-infinite environment sequence with shift maps.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentDriver {
    n_states: usize,
    bounds: RateBounds,
    kind: DriverKind,
    offset: i64,
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn rate_word(seed: u64, index: i64, slot: usize) -> u64 {
    let mut h = seed ^ 0x9e3779b97f4a7c15;
    h = mix64(h ^ (index as u64).wrapping_mul(0xd1342543de82ef95));
    mix64(h ^ (slot as u64).wrapping_mul(0xaf251af3b0f025b5))
}

fn unit_from_word(word: u64) -> f64 {
    // 53 high bits give a uniform dyadic rational in [0, 1).
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl EnvironmentDriver {
    /// A driver that emits the same block at every index.
    pub fn constant(block: BandParameters, bounds: RateBounds) -> Result<Self> {
        if !bounds.contains(&block) {
            return Err(Error::InvalidParameter(
                "constant block has rates outside [alpha, beta]".into(),
            ));
        }
        Ok(Self {
            n_states: block.n_states(),
            bounds,
            kind: DriverKind::Constant(block),
            offset: 0,
        })
    }

    /// A driver cycling through `blocks` with period `T = blocks.len()`.
    pub fn periodic(blocks: Vec<BandParameters>, bounds: RateBounds) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidParameter(
                "periodic driver needs at least one block".into(),
            ));
        }
        let n_states = blocks[0].n_states();
        for block in &blocks {
            if block.n_states() != n_states {
                return Err(Error::DimensionMismatch {
                    expected: n_states,
                    got: block.n_states(),
                });
            }
            if !bounds.contains(block) {
                return Err(Error::InvalidParameter(
                    "periodic block has rates outside [alpha, beta]".into(),
                ));
            }
        }
        Ok(Self {
            n_states,
            bounds,
            kind: DriverKind::Periodic(blocks),
            offset: 0,
        })
    }

    /// A seeded-random driver drawing rates from `distribution` on
    /// `[alpha, beta]`.
    pub fn random(
        n_states: usize,
        bounds: RateBounds,
        seed: u64,
        distribution: RateDistribution,
    ) -> Result<Self> {
        if n_states < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_states must be at least 2, got {n_states}"
            )));
        }
        Ok(Self {
            n_states,
            bounds,
            kind: DriverKind::Random { seed, distribution },
            offset: 0,
        })
    }

    /// Chain size `N`.
    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// The uniform rate bounds every emitted block satisfies.
    pub fn bounds(&self) -> &RateBounds {
        &self.bounds
    }

    /// Period of the environment: 1 for constant drivers, `T` for periodic
    /// ones, `None` for random ones.
    pub fn period(&self) -> Option<usize> {
        match &self.kind {
            DriverKind::Constant(_) => Some(1),
            DriverKind::Periodic(blocks) => Some(blocks.len()),
            DriverKind::Random { .. } => None,
        }
    }

    /// Band rates at absolute index `n`. Pure in `(driver identity, n)`.
    pub fn env_at(&self, n: i64) -> BandParameters {
        let index = self.offset + n;
        match &self.kind {
            DriverKind::Constant(block) => block.clone(),
            DriverKind::Periodic(blocks) => {
                let t = blocks.len() as i64;
                blocks[index.rem_euclid(t) as usize].clone()
            }
            DriverKind::Random { seed, distribution } => {
                let n_rates = 2 * self.n_states - 2;
                let alpha = self.bounds.alpha();
                let beta = self.bounds.beta();
                let rates = (0..n_rates)
                    .map(|slot| {
                        let word = rate_word(*seed, index, slot);
                        match distribution {
                            RateDistribution::Uniform => {
                                alpha + unit_from_word(word) * (beta - alpha)
                            }
                            RateDistribution::TwoPoint => {
                                if word & 1 == 0 {
                                    alpha
                                } else {
                                    beta
                                }
                            }
                        }
                    })
                    .collect();
                BandParameters::new(self.n_states, rates).expect("in-bounds rates are valid")
            }
        }
    }

    /// The driver advanced by `m` steps: `shift(d, m).env_at(n) = d.env_at(n + m)`.
    pub fn shift(&self, m: i64) -> Self {
        let mut shifted = self.clone();
        shifted.offset += m;
        shifted
    }

    /// The transition matrix `L = I + delta * Q(env_at(n))`.
    pub fn transition_at(&self, n: i64, delta: f64) -> Result<TransitionMatrix> {
        build_transition(&build_generator(&self.env_at(n)), delta, &self.bounds)
    }
}
