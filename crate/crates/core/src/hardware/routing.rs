use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CouplingMap;
use crate::error::{config, usage, Result};
use crate::sim::{qubit_mask, Circuit, Gate, StateVector};

/// Placement of logical qubits on physical qubits: `physical[l]` hosts
/// logical qubit `l`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub physical: Vec<usize>,
}

impl Layout {
    pub fn identity(n_logical: usize) -> Self {
        Self {
            physical: (0..n_logical).collect(),
        }
    }

    pub fn new(physical: Vec<usize>) -> Self {
        Self { physical }
    }

    pub fn len(&self) -> usize {
        self.physical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.physical.is_empty()
    }

    pub fn validate(&self, n_physical: usize) -> Result<()> {
        let mut seen = vec![false; n_physical];
        for &p in &self.physical {
            if p >= n_physical {
                return Err(usage(format!(
                    "layout uses physical qubit {p} on a {n_physical}-qubit device"
                )));
            }
            if std::mem::replace(&mut seen[p], true) {
                return Err(usage(format!("layout maps two logical qubits to {p}")));
            }
        }
        Ok(())
    }
}

/// Inserts SWAP chains so every two-qubit gate acts on coupled physical
/// qubits.
///
/// For an uncoupled pair the first operand is swapped along the shortest
/// path toward the second until adjacent, and the layout is updated. The
/// output acts on all `cm.n_qubits` physical qubits; the returned layout is
/// the placement after the last gate.
pub fn route_circuit(
    circuit: &Circuit,
    cm: &CouplingMap,
    initial: &Layout,
) -> Result<(Circuit, Layout)> {
    let n_logical = circuit.n_qubits();
    if n_logical > cm.n_qubits {
        return Err(config(format!(
            "{n_logical}-qubit circuit does not fit on {} ({} qubits)",
            cm.name, cm.n_qubits
        )));
    }
    if initial.len() != n_logical {
        return Err(usage(format!(
            "layout places {} qubits, circuit has {n_logical}",
            initial.len()
        )));
    }
    initial.validate(cm.n_qubits)?;

    // Complete permutation: idle physical qubits act as ancillas numbered
    // after the logical ones, in ascending physical order.
    let mut log_to_phys = initial.physical.clone();
    log_to_phys.extend((0..cm.n_qubits).filter(|p| !initial.physical.contains(p)));
    let mut phys_to_log = vec![0; cm.n_qubits];
    for (l, &p) in log_to_phys.iter().enumerate() {
        phys_to_log[p] = l;
    }

    let mut out = Circuit::new(cm.n_qubits);
    for gate in circuit.gates() {
        if gate.is_two_qubit() {
            let qs = gate.qubits();
            let (pa, pb) = (log_to_phys[qs[0]], log_to_phys[qs[1]]);
            if !cm.is_coupled(pa, pb) {
                let path = cm.shortest_path(pa, pb)?;
                for step in path.windows(2).take(path.len() - 2) {
                    let (u, v) = (step[0], step[1]);
                    out.push(Gate::swap(u, v))?;
                    let (lu, lv) = (phys_to_log[u], phys_to_log[v]);
                    phys_to_log.swap(u, v);
                    log_to_phys[lu] = v;
                    log_to_phys[lv] = u;
                }
            }
        }
        out.push(gate.remap(|l| log_to_phys[l]))?;
    }
    log_to_phys.truncate(n_logical);
    Ok((out, Layout::new(log_to_phys)))
}

/// Physical basis index holding logical basis index `logical`, with idle
/// qubits in |0⟩.
pub(crate) fn physical_index(logical: usize, layout: &Layout, n_physical: usize) -> usize {
    let n_logical = layout.len();
    layout
        .physical
        .iter()
        .enumerate()
        .filter(|&(l, _)| logical & qubit_mask(n_logical, l) != 0)
        .fold(0, |acc, (_, &p)| acc | qubit_mask(n_physical, p))
}

/// Logical basis index read off a physical one, ignoring idle qubits.
pub(crate) fn logical_index(physical: usize, layout: &Layout, n_physical: usize) -> usize {
    let n_logical = layout.len();
    layout
        .physical
        .iter()
        .enumerate()
        .filter(|&(_, &p)| physical & qubit_mask(n_physical, p) != 0)
        .fold(0, |acc, (l, _)| acc | qubit_mask(n_logical, l))
}

/// Reads the logical register out of a routed device state: the amplitudes
/// whose idle qubits are all |0⟩, reordered by `layout`. The result has
/// unit norm exactly when the idle qubits are unentangled and in |0⟩.
pub fn logical_state(state: &StateVector, layout: &Layout) -> Result<StateVector> {
    let n_physical = state.n_qubits();
    layout.validate(n_physical)?;
    if layout.is_empty() {
        return Err(usage("empty layout"));
    }
    let amps: Vec<Complex64> = (0..1usize << layout.len())
        .map(|l| state.amplitudes()[physical_index(l, layout, n_physical)])
        .collect();
    StateVector::from_amplitudes(amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featuremap::FeatureMapConfig;

    #[test]
    fn adjacent_gates_need_no_swaps() {
        let fm = FeatureMapConfig::zz(2);
        let c = fm.circuit(&[0.4, 1.2]).unwrap();
        let (routed, layout) = route_circuit(&c, &CouplingMap::ourense(), &Layout::identity(2)).unwrap();
        assert_eq!(routed.count_swaps(), 0);
        assert_eq!(routed.n_qubits(), 5);
        assert_eq!(layout, Layout::identity(2));
    }

    #[test]
    fn far_cnot_on_ourense() {
        let mut c = Circuit::new(5);
        c.push(Gate::cnot(0, 4)).unwrap();
        let (routed, layout) = route_circuit(&c, &CouplingMap::ourense(), &Layout::identity(5)).unwrap();
        assert_eq!(routed.count_swaps(), 2);
        assert_eq!(
            routed.gates(),
            &[Gate::swap(0, 1), Gate::swap(1, 3), Gate::cnot(3, 4)]
        );
        assert_eq!(layout.physical, vec![3, 0, 2, 1, 4]);
    }

    #[test]
    fn full_connectivity_is_untouched() {
        let c = Circuit::from_gates(3, vec![Gate::h(0), Gate::cnot(0, 2), Gate::swap(2, 1)]).unwrap();
        let (routed, layout) = route_circuit(&c, &CouplingMap::full(3).unwrap(), &Layout::identity(3)).unwrap();
        assert_eq!(routed, c);
        assert_eq!(layout, Layout::identity(3));
    }

    #[test]
    fn too_large_and_bad_layouts() {
        let c = Circuit::new(6);
        assert!(matches!(
            route_circuit(&c, &CouplingMap::ourense(), &Layout::identity(6)),
            Err(crate::Error::Config(_))
        ));
        let c = Circuit::new(2);
        assert!(route_circuit(&c, &CouplingMap::ourense(), &Layout::new(vec![1, 1])).is_err());
        assert!(route_circuit(&c, &CouplingMap::ourense(), &Layout::new(vec![0])).is_err());
    }

    #[test]
    fn index_maps_are_inverse() {
        let layout = Layout::new(vec![3, 0, 4]);
        for l in 0..8 {
            let p = physical_index(l, &layout, 5);
            assert_eq!(logical_index(p, &layout, 5), l);
        }
    }
}
