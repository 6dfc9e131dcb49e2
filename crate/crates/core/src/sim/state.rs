use num_complex::Complex64;

use super::{qubit_mask, Circuit, Gate};
use crate::error::{config, usage, Result};

/// Largest register the simulator will allocate (2^24 amplitudes).
pub const MAX_QUBITS: usize = 24;

/// Single-qubit Pauli operators, used for noise insertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Dense vector of `2^n` complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0…0⟩ on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(config(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes. The length must be a power of two; the vector
    /// is not renormalized.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(usage(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(config(format!("{n_qubits} qubits exceeds {MAX_QUBITS}")));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(usage("non-finite amplitude"));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(usage(format!(
                "circuit has {} qubits, state has {}",
                circuit.n_qubits(),
                self.n_qubits
            )));
        }
        for g in circuit.gates() {
            self.apply_unchecked(g);
        }
        Ok(())
    }

    /// Prepares `circuit` applied to |0…0⟩.
    pub fn from_circuit(circuit: &Circuit) -> Result<Self> {
        let mut s = Self::zero(circuit.n_qubits())?;
        s.apply_circuit(circuit)?;
        Ok(s)
    }

    pub fn apply_pauli(&mut self, q: usize, pauli: Pauli) -> Result<()> {
        if q >= self.n_qubits {
            return Err(usage(format!("qubit {q} out of range")));
        }
        let m = qubit_mask(self.n_qubits, q);
        match pauli {
            Pauli::X => self.for_pairs(m, std::mem::swap),
            Pauli::Z => self.for_pairs(m, |_, a1| *a1 = -*a1),
            Pauli::Y => self.for_pairs(m, |a0, a1| {
                let (b0, b1) = (*a0, *a1);
                // Y = [[0, -i], [i, 0]]
                *a0 = Complex64::new(b1.im, -b1.re);
                *a1 = Complex64::new(-b0.im, b0.re);
            }),
        }
        Ok(())
    }

    pub(crate) fn apply_unchecked(&mut self, gate: &Gate) {
        let n = self.n_qubits;
        match *gate {
            Gate::H { q } => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                self.for_pairs(qubit_mask(n, q), |a0, a1| {
                    let (b0, b1) = (*a0, *a1);
                    *a0 = (b0 + b1) * s;
                    *a1 = (b0 - b1) * s;
                });
            }
            Gate::X { q } => self.for_pairs(qubit_mask(n, q), std::mem::swap),
            Gate::Phase { q, theta } => {
                let p = Complex64::from_polar(1.0, theta);
                self.for_pairs(qubit_mask(n, q), |_, a1| *a1 *= p);
            }
            Gate::Rz { q, theta } => {
                let p0 = Complex64::from_polar(1.0, -theta / 2.0);
                let p1 = Complex64::from_polar(1.0, theta / 2.0);
                self.for_pairs(qubit_mask(n, q), |a0, a1| {
                    *a0 *= p0;
                    *a1 *= p1;
                });
            }
            Gate::Cnot { control, target } => {
                let cm = qubit_mask(n, control);
                let tm = qubit_mask(n, target);
                for i in 0..self.amps.len() {
                    if i & cm != 0 && i & tm == 0 {
                        self.amps.swap(i, i | tm);
                    }
                }
            }
            Gate::Swap { a, b } => {
                let am = qubit_mask(n, a);
                let bm = qubit_mask(n, b);
                for i in 0..self.amps.len() {
                    if i & am != 0 && i & bm == 0 {
                        self.amps.swap(i, i ^ am ^ bm);
                    }
                }
            }
        }
    }

    /// Visits each (|…0…⟩, |…1…⟩) amplitude pair for the qubit at `mask`.
    #[inline]
    fn for_pairs(&mut self, mask: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
        let len = self.amps.len();
        let mut block = 0;
        while block < len {
            for i in block..block + mask {
                let (lo, hi) = self.amps.split_at_mut(i + mask);
                f(&mut lo[i], &mut hi[0]);
            }
            block += mask << 1;
        }
    }

    /// Debug dump as a JSON array of `[re, im]` pairs.
    pub fn to_json(&self) -> String {
        let pairs: Vec<[f64; 2]> = self.amps.iter().map(|a| [a.re, a.im]).collect();
        serde_json::to_string(&pairs).expect("finite floats serialize")
    }
}

/// ⟨a|b⟩ = Σ conj(aᵢ)·bᵢ.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    if a.n_qubits != b.n_qubits {
        return Err(usage(format!(
            "inner product of {}-qubit and {}-qubit states",
            a.n_qubits, b.n_qubits
        )));
    }
    Ok(a.amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Probability of measuring all qubits in |0⟩.
pub fn prob_all_zeros(state: &StateVector) -> f64 {
    state.amps[0].norm_sqr()
}
