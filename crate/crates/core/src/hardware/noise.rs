use rand::Rng;
use serde::{Deserialize, Serialize};

use super::routing::logical_index;
use super::{route_circuit, CouplingMap, Layout};
use crate::error::{config, usage, Result};
use crate::par::Exec;
use crate::rng::ShotStreams;
use crate::sim::measure::{cumulative, draw_index};
use crate::sim::{Circuit, CountHistogram, Gate, Pauli, StateVector};

/// Stochastic Pauli gate errors plus independent readout bit flips.
///
/// The defaults are calibration targets for the emulated devices, not
/// measured device data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Error probability after each single-qubit gate.
    pub p1: f64,
    /// Error probability after each two-qubit gate (SWAPs included).
    pub p2: f64,
    /// Flip probability for each measured bit.
    pub p_readout: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            p1: 0.001,
            p2: 0.01,
            p_readout: 0.02,
        }
    }
}

impl NoiseModel {
    pub fn ideal() -> Self {
        Self {
            p1: 0.0,
            p2: 0.0,
            p_readout: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("p_readout", self.p_readout)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(config(format!("noise {name} = {p} is outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.p_readout == 0.0
    }
}

const PAULIS: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

/// A Pauli error inserted right after gate `after`.
#[derive(Debug, Clone, Copy)]
struct Fault {
    after: usize,
    qubit: usize,
    pauli: Pauli,
}

fn draw_faults<R: Rng>(gates: &[Gate], noise: &NoiseModel, rng: &mut R, faults: &mut Vec<Fault>) {
    faults.clear();
    for (idx, gate) in gates.iter().enumerate() {
        let p = if gate.is_two_qubit() { noise.p2 } else { noise.p1 };
        if p > 0.0 && rng.gen::<f64>() < p {
            for qubit in gate.qubits() {
                let pauli = PAULIS[rng.gen_range(0..3)];
                faults.push(Fault { after: idx, qubit, pauli });
            }
        }
    }
}

fn run_trajectory(circuit: &Circuit, faults: &[Fault]) -> Result<StateVector> {
    let mut state = StateVector::zero(circuit.n_qubits())?;
    let mut next = faults.iter().peekable();
    for (idx, gate) in circuit.gates().iter().enumerate() {
        state.apply_unchecked(gate);
        while let Some(f) = next.next_if(|f| f.after == idx) {
            state.apply_pauli(f.qubit, f.pauli)?;
        }
    }
    Ok(state)
}

/// Distribution over the logical register, marginalizing idle qubits.
fn logical_cdf(state: &StateVector, layout: &Layout) -> Vec<f64> {
    let n_physical = state.n_qubits();
    let mut probs = vec![0.0; 1 << layout.len()];
    for (p, amp) in state.amplitudes().iter().enumerate() {
        probs[logical_index(p, layout, n_physical)] += amp.norm_sqr();
    }
    cumulative(&probs)
}

/// Samples `circuit` on an emulated device with the identity initial layout.
pub fn noisy_sample(
    circuit: &Circuit,
    cm: &CouplingMap,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<CountHistogram> {
    let layout = Layout::identity(circuit.n_qubits());
    noisy_sample_with(circuit, cm, &layout, noise, shots, seed, Exec::default())
}

/// Trajectory-sampled execution on an emulated device.
///
/// The circuit is routed once. Each shot `k` uses stream `k` under `seed`:
/// first a uniform for the measurement draw, then one uniform per gate
/// deciding whether a Pauli fault follows it (uniform choice among X, Y, Z
/// for each operand), then one uniform per measured bit for readout flips.
/// Shots with no faults reuse the ideal output distribution. Outcomes are
/// reported over the logical qubits in logical order, so with an ideal
/// noise model the histogram matches [`crate::sim::sample_counts`] for the
/// same seed.
pub fn noisy_sample_with(
    circuit: &Circuit,
    cm: &CouplingMap,
    initial: &Layout,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
    exec: Exec,
) -> Result<CountHistogram> {
    if shots == 0 {
        return Err(usage("shots must be at least 1"));
    }
    noise.validate()?;
    let (routed, final_layout) = route_circuit(circuit, cm, initial)?;
    let ideal_cdf = logical_cdf(&StateVector::from_circuit(&routed)?, &final_layout);
    let n_logical = circuit.n_qubits();
    let streams = ShotStreams::new(seed);

    let outcomes: Vec<Result<usize>> = exec.map_range(shots as usize, |k| {
        let mut rng = streams.shot(k as u64);
        let u: f64 = rng.gen();
        let mut faults = Vec::new();
        draw_faults(routed.gates(), noise, &mut rng, &mut faults);
        let mut outcome = if faults.is_empty() {
            draw_index(&ideal_cdf, u)
        } else {
            let state = run_trajectory(&routed, &faults)?;
            draw_index(&logical_cdf(&state, &final_layout), u)
        };
        if noise.p_readout > 0.0 {
            for q in 0..n_logical {
                if rng.gen::<f64>() < noise.p_readout {
                    outcome ^= 1 << (n_logical - 1 - q);
                }
            }
        }
        Ok(outcome)
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(CountHistogram::from_indices(n_logical, outcomes))
}
