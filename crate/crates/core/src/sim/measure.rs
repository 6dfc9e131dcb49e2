use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{bitstring, StateVector};
use crate::error::{usage, Result};
use crate::par::Exec;
use crate::rng::ShotStreams;

/// Measurement outcome counts keyed by bitstring (qubit 0 leftmost).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountHistogram {
    pub n_qubits: usize,
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

impl CountHistogram {
    pub(crate) fn from_indices(n_qubits: usize, outcomes: impl IntoIterator<Item = usize>) -> Self {
        let mut by_index: BTreeMap<usize, u64> = BTreeMap::new();
        let mut shots = 0;
        for idx in outcomes {
            *by_index.entry(idx).or_default() += 1;
            shots += 1;
        }
        let counts = by_index
            .into_iter()
            .map(|(i, c)| (bitstring(i, n_qubits), c))
            .collect();
        Self {
            n_qubits,
            shots,
            counts,
        }
    }

    pub fn count(&self, bits: &str) -> u64 {
        self.counts.get(bits).copied().unwrap_or(0)
    }

    pub fn frequency(&self, bits: &str) -> f64 {
        self.count(bits) as f64 / self.shots as f64
    }

    /// Frequency of the all-zeros outcome.
    pub fn zeros_frequency(&self) -> f64 {
        self.frequency(&"0".repeat(self.n_qubits))
    }
}

/// Cumulative distribution over basis indices.
pub(crate) fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

/// Inverse-CDF draw for `u ∈ [0, 1)`, scaled by the CDF total so that
/// slightly unnormalized inputs still land on a valid index.
pub(crate) fn draw_index(cdf: &[f64], u: f64) -> usize {
    let total = *cdf.last().expect("nonempty distribution");
    let target = u * total;
    let idx = cdf.partition_point(|&c| c <= target);
    // Skip trailing zero-probability outcomes reached through rounding.
    idx.min(cdf.len() - 1)
}

/// Draws `shots` computational-basis measurements of `state`.
///
/// Shot `k` consumes the first uniform of stream `k` under `seed`, so the
/// histogram is independent of thread count.
pub fn sample_counts(state: &StateVector, shots: u64, seed: u64) -> Result<CountHistogram> {
    sample_counts_with(state, shots, seed, Exec::default())
}

pub fn sample_counts_with(
    state: &StateVector,
    shots: u64,
    seed: u64,
    exec: Exec,
) -> Result<CountHistogram> {
    if shots == 0 {
        return Err(usage("shots must be at least 1"));
    }
    let cdf = cumulative(&state.probabilities());
    let streams = ShotStreams::new(seed);
    let outcomes = exec.map_range(shots as usize, |k| {
        let u: f64 = streams.shot(k as u64).gen();
        draw_index(&cdf, u)
    });
    Ok(CountHistogram::from_indices(state.n_qubits(), outcomes))
}
