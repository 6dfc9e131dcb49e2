use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};

/// A gate from the simulator's fixed gate set.
///
/// `Phase(q, θ)` is diag(1, e^{iθ}); `Rz(q, θ)` is diag(e^{-iθ/2}, e^{iθ/2}).
/// They differ by a global phase only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum Gate {
    H { q: usize },
    X { q: usize },
    Phase { q: usize, theta: f64 },
    Rz { q: usize, theta: f64 },
    Cnot { control: usize, target: usize },
    Swap { a: usize, b: usize },
}

impl Gate {
    pub fn h(q: usize) -> Self {
        Gate::H { q }
    }
    pub fn x(q: usize) -> Self {
        Gate::X { q }
    }
    pub fn phase(q: usize, theta: f64) -> Self {
        Gate::Phase { q, theta }
    }
    pub fn rz(q: usize, theta: f64) -> Self {
        Gate::Rz { q, theta }
    }
    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }
    pub fn swap(a: usize, b: usize) -> Self {
        Gate::Swap { a, b }
    }

    /// Qubits the gate acts on, control first for CNOT.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H { q } | Gate::X { q } | Gate::Phase { q, .. } | Gate::Rz { q, .. } => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Swap { a, b } => vec![a, b],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot { .. } | Gate::Swap { .. })
    }

    /// The inverse gate: phases negate, everything else is self-inverse.
    pub fn inverse(&self) -> Self {
        match *self {
            Gate::Phase { q, theta } => Gate::Phase { q, theta: -theta },
            Gate::Rz { q, theta } => Gate::Rz { q, theta: -theta },
            g => g,
        }
    }

    /// Same gate with every qubit index passed through `f`.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> Self {
        match *self {
            Gate::H { q } => Gate::H { q: f(q) },
            Gate::X { q } => Gate::X { q: f(q) },
            Gate::Phase { q, theta } => Gate::Phase { q: f(q), theta },
            Gate::Rz { q, theta } => Gate::Rz { q: f(q), theta },
            Gate::Cnot { control, target } => Gate::Cnot {
                control: f(control),
                target: f(target),
            },
            Gate::Swap { a, b } => Gate::Swap { a: f(a), b: f(b) },
        }
    }

    pub(crate) fn validate(&self, n_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        if let Some(&q) = qs.iter().find(|&&q| q >= n_qubits) {
            return Err(usage(format!(
                "gate {self:?} uses qubit {q} but only {n_qubits} qubits exist"
            )));
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(usage(format!("gate {self:?} repeats qubit {}", qs[0])));
        }
        if let Gate::Phase { theta, .. } | Gate::Rz { theta, .. } = self {
            if !theta.is_finite() {
                return Err(usage(format!("gate {self:?} has non-finite angle")));
            }
        }
        Ok(())
    }
}

/// An ordered gate list over a fixed number of qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(n_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn count_swaps(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Swap { .. }))
            .count()
    }

    /// The adjoint circuit: gates reversed, each inverted.
    pub fn inverse(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Appends every gate of `other`, which must act on the same register.
    pub fn append(&mut self, other: &Circuit) -> Result<&mut Self> {
        if other.n_qubits != self.n_qubits {
            return Err(usage(format!(
                "cannot append a {}-qubit circuit to a {}-qubit circuit",
                other.n_qubits, self.n_qubits
            )));
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(self)
    }
}

/// H on qubit 0 followed by CNOT(0 → 1).
pub fn bell_circuit() -> Circuit {
    Circuit {
        n_qubits: 2,
        gates: vec![Gate::h(0), Gate::cnot(0, 1)],
    }
}
