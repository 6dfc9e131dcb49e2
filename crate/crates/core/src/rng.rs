//! Seed derivation and per-task random streams.
//!
//! All randomness flows from ChaCha8 (`rand_chacha`), which is portable and
//! produces identical streams on every platform. Independent tasks (Gram
//! entries, measurement shots, experiment arms) never share a generator:
//! each derives its own from a master seed, so results do not depend on
//! evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and a sequence of integer tags.
///
/// `derive_seed(s, &[i, j])` is the per-pair seed used for kernel entries.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

/// Derives a child seed from a string label, e.g. an experiment arm name.
pub fn derive_seed_str(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label bytes.
    let h = label
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
        });
    derive_seed(seed, &[h])
}

/// A generator for general use, seeded from `seed`.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Source of independent per-shot streams sharing one key.
///
/// Shot `k` reads ChaCha stream `k` under the key derived from the seed.
#[derive(Clone)]
pub struct ShotStreams {
    base: ChaCha8Rng,
}

impl ShotStreams {
    pub fn new(seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn shot(&self, index: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(index);
        rng
    }
}
