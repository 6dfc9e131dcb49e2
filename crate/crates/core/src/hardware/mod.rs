//! NISQ device emulation: coupling maps, SWAP routing, and stochastic
//! Pauli/readout noise.

mod coupling;
mod noise;
mod routing;

pub use coupling::CouplingMap;
pub use noise::{noisy_sample, noisy_sample_with, NoiseModel};
pub use routing::{logical_state, route_circuit, Layout};

use serde::{Deserialize, Serialize};

/// An emulated device: topology, noise, and the initial placement of
/// logical qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Device {
    pub coupling: CouplingMap,
    pub noise: NoiseModel,
    /// `None` places logical qubit `i` on physical qubit `i`.
    #[serde(default)]
    pub layout: Option<Layout>,
}

impl Device {
    pub fn new(coupling: CouplingMap, noise: NoiseModel) -> Self {
        Self {
            coupling,
            noise,
            layout: None,
        }
    }

    pub fn with_layout(mut self, layout: Layout) -> Self {
        self.layout = Some(layout);
        self
    }

    pub(crate) fn layout_for(&self, n_logical: usize) -> Layout {
        self.layout
            .clone()
            .unwrap_or_else(|| Layout::identity(n_logical))
    }
}
