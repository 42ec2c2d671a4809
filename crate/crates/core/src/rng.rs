//! Seeded, splittable supply of standard normal variates.
//!
//! Every simulation task owns one [`NormalStream`]. Streams are keyed by a
//! [`SeedSpec`] `(master_seed, stream_id)`; the pair is folded into a single
//! 64-bit ChaCha8 seed by [`SeedSpec::derived_seed`]:
//!
//! ```text
//! seed = mix64(mix64(master_seed) ^ mix64(stream_id + 0x9e3779b97f4a7c15))
//! ```
//!
//! `mix64` is the SplitMix64 finalizer, a bijection on `u64`, so for a fixed
//! master seed distinct stream ids always map to distinct generator seeds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer. Bijective on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    pub fn derived_seed(&self) -> u64 {
        mix64(mix64(self.master_seed) ^ mix64(self.stream_id.wrapping_add(GOLDEN_GAMMA)))
    }
}

/// Stream id for one cell of an experiment: replication `rep` at the
/// `cell`-th entry of the sample-size schedule. Injective for `rep, cell < 2^32`.
pub fn cell_stream_id(rep: u32, cell: u32) -> u64 {
    mix64(((rep as u64) << 32) | cell as u64)
}

/// An independent stream of i.i.d. `N(0, 1)` variates.
#[derive(Debug, Clone)]
pub struct NormalStream {
    rng: ChaCha8Rng,
}

impl NormalStream {
    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = self.rng.sample(StandardNormal);
        }
    }
}

impl Iterator for NormalStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.next_normal())
    }
}

pub fn derive_stream(seed: SeedSpec) -> NormalStream {
    NormalStream {
        rng: ChaCha8Rng::seed_from_u64(seed.derived_seed()),
    }
}
