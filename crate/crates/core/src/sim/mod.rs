//! Dense statevector simulation.
//!
//! Bit ordering: qubit 0 is the most significant bit of a basis-state index,
//! so bitstrings print with qubit 0 leftmost. For `n` qubits, qubit `q`
//! lives at bit `n - 1 - q`.

mod circuit;
pub(crate) mod measure;
mod state;

pub use circuit::{bell_circuit, Circuit, Gate};
pub use measure::{sample_counts, sample_counts_with, CountHistogram};
pub use state::{inner_product, prob_all_zeros, Pauli, StateVector, MAX_QUBITS};

pub use num_complex::Complex64 as ComplexAmp;

/// Bit mask selecting qubit `q` in an `n`-qubit basis index.
#[inline]
pub(crate) fn qubit_mask(n_qubits: usize, q: usize) -> usize {
    1usize << (n_qubits - 1 - q)
}

/// Renders a basis index as a bitstring, qubit 0 leftmost.
pub fn bitstring(index: usize, n_qubits: usize) -> String {
    format!("{:0width$b}", index, width = n_qubits)
}
