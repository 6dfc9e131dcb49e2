//! Quantum kernel values and Gram matrices.
//!
//! `K(x, z) = |⟨Φ(x)|Φ(z)⟩|²` is computed exactly from two statevectors, or
//! estimated as the all-zeros frequency of the composite circuit
//! `U_Φ(x)† U_Φ(z)` applied to |0ⁿ⟩, optionally on an emulated device.

use std::io::Write;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::featuremap::{rbf_kernel, FeatureMapConfig, RbfConfig};
use crate::hardware::{noisy_sample_with, Device};
use crate::linalg::{is_symmetric, symmetric_eigen};
use crate::par::Exec;
use crate::rng::{derive_seed, derive_seed_str};
use crate::sim::{inner_product, prob_all_zeros, sample_counts_with, Circuit, StateVector};

/// Shots per kernel entry when none is configured.
pub const DEFAULT_SHOTS: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMode {
    Exact,
    Sampled,
}

/// A square kernel (Gram) matrix with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMatrix {
    pub mode: KernelMode,
    /// Shots per entry; 0 for exact matrices.
    pub shots: u64,
    pub feature_map: Option<FeatureMapConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rbf: Option<RbfConfig>,
    #[serde(with = "matrix_rows")]
    pub values: Array2<f64>,
}

/// How kernel entries are obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelEstimator {
    pub mode: KernelMode,
    pub shots: u64,
    pub seed: u64,
    /// Emulated device for sampled estimates; `None` samples ideally.
    pub device: Option<Device>,
    pub exec: Exec,
}

impl KernelEstimator {
    pub fn exact() -> Self {
        Self {
            mode: KernelMode::Exact,
            shots: 0,
            seed: 0,
            device: None,
            exec: Exec::default(),
        }
    }

    pub fn sampled(shots: u64, seed: u64) -> Self {
        Self {
            mode: KernelMode::Sampled,
            shots,
            seed,
            device: None,
            exec: Exec::default(),
        }
    }

    pub fn on_device(mut self, device: Device) -> Self {
        self.device = Some(device);
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.mode == KernelMode::Sampled && self.shots == 0 {
            return Err(usage("sampled kernels need at least 1 shot"));
        }
        if self.mode == KernelMode::Exact && self.device.is_some() {
            return Err(usage("exact kernels cannot run on an emulated device"));
        }
        Ok(())
    }
}

fn feature_state(x: &[f64], fm: &FeatureMapConfig) -> Result<StateVector> {
    StateVector::from_circuit(&fm.circuit(x)?)
}

/// `|⟨Φ(x)|Φ(z)⟩|²` from two prepared statevectors.
pub fn kernel_exact(x: &[f64], z: &[f64], fm: &FeatureMapConfig) -> Result<f64> {
    let a = feature_state(x, fm)?;
    let b = feature_state(z, fm)?;
    Ok(inner_product(&a, &b)?.norm_sqr().min(1.0))
}

/// `U_Φ(z)` followed by `U_Φ(x)†`.
pub fn composite_circuit(x: &[f64], z: &[f64], fm: &FeatureMapConfig) -> Result<Circuit> {
    let mut c = fm.circuit(z)?;
    c.append(&fm.circuit(x)?.inverse())?;
    Ok(c)
}

/// Exact all-zeros probability of the composite circuit; equals
/// [`kernel_exact`] analytically.
pub fn kernel_via_composite(x: &[f64], z: &[f64], fm: &FeatureMapConfig) -> Result<f64> {
    let state = StateVector::from_circuit(&composite_circuit(x, z, fm)?)?;
    Ok(prob_all_zeros(&state))
}

/// All-zeros frequency of the composite circuit over `shots` measurements.
/// With a device, the circuit is routed and run under its noise model.
pub fn kernel_sampled(
    x: &[f64],
    z: &[f64],
    fm: &FeatureMapConfig,
    shots: u64,
    seed: u64,
    device: Option<&Device>,
) -> Result<f64> {
    if shots == 0 {
        return Err(usage("shots must be at least 1"));
    }
    let circuit = composite_circuit(x, z, fm)?;
    let hist = match device {
        None => sample_counts_with(&StateVector::from_circuit(&circuit)?, shots, seed, Exec::Sequential)?,
        Some(dev) => noisy_sample_with(
            &circuit,
            &dev.coupling,
            &dev.layout_for(circuit.n_qubits()),
            &dev.noise,
            shots,
            seed,
            Exec::Sequential,
        )?,
    };
    Ok(hist.zeros_frequency())
}

fn check_points(points: &[Vec<f64>], fm: &FeatureMapConfig, what: &str) -> Result<()> {
    if points.is_empty() {
        return Err(usage(format!("{what} point list is empty")));
    }
    fm.validate()?;
    if let Some(p) = points.iter().find(|p| p.len() != fm.n_features) {
        return Err(usage(format!(
            "{what} point has {} features, feature map expects {}",
            p.len(),
            fm.n_features
        )));
    }
    Ok(())
}

/// Upper-triangle index pairs `(i, j)`, `i < j`.
fn upper_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Symmetric Gram matrix with unit diagonal.
///
/// Each off-diagonal pair is evaluated once and mirrored. Sampled entry
/// `(i, j)` uses seed `derive_seed(seed, [i, j])`, so the matrix does not
/// depend on evaluation order.
pub fn gram_matrix(
    points: &[Vec<f64>],
    fm: &FeatureMapConfig,
    est: &KernelEstimator,
) -> Result<KernelMatrix> {
    check_points(points, fm, "training")?;
    est.validate()?;
    let n = points.len();
    let pairs = upper_pairs(n);

    let entries: Vec<Result<f64>> = match est.mode {
        KernelMode::Exact => {
            let states = est
                .exec
                .map_slice(points, |p| feature_state(p, fm))
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            est.exec.map_slice(&pairs, |&(i, j)| {
                Ok(inner_product(&states[i], &states[j])?.norm_sqr().min(1.0))
            })
        }
        KernelMode::Sampled => est.exec.map_slice(&pairs, |&(i, j)| {
            let seed = derive_seed(est.seed, &[i as u64, j as u64]);
            kernel_sampled(&points[i], &points[j], fm, est.shots, seed, est.device.as_ref())
        }),
    };

    let mut values = Array2::<f64>::eye(n);
    for (&(i, j), v) in pairs.iter().zip(entries) {
        let v = v?;
        values[[i, j]] = v;
        values[[j, i]] = v;
    }
    Ok(KernelMatrix {
        mode: est.mode,
        shots: if est.mode == KernelMode::Exact { 0 } else { est.shots },
        feature_map: Some(*fm),
        rbf: None,
        values,
    })
}

/// Rectangular kernel block `K[test_i][train_j]`.
pub fn cross_gram(
    train: &[Vec<f64>],
    test: &[Vec<f64>],
    fm: &FeatureMapConfig,
    est: &KernelEstimator,
) -> Result<Array2<f64>> {
    check_points(train, fm, "training")?;
    check_points(test, fm, "test")?;
    est.validate()?;
    let (nt, nr) = (test.len(), train.len());
    let flat: Vec<Result<f64>> = match est.mode {
        KernelMode::Exact => {
            let train_states = est
                .exec
                .map_slice(train, |p| feature_state(p, fm))
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            let test_states = est
                .exec
                .map_slice(test, |p| feature_state(p, fm))
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            est.exec.map_range(nt * nr, |k| {
                let (i, j) = (k / nr, k % nr);
                Ok(inner_product(&test_states[i], &train_states[j])?.norm_sqr().min(1.0))
            })
        }
        KernelMode::Sampled => {
            let base = derive_seed_str(est.seed, "cross");
            est.exec.map_range(nt * nr, |k| {
                let (i, j) = (k / nr, k % nr);
                let seed = derive_seed(base, &[i as u64, j as u64]);
                kernel_sampled(&train[j], &test[i], fm, est.shots, seed, est.device.as_ref())
            })
        }
    };
    let flat = flat.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Array2::from_shape_vec((nt, nr), flat).expect("shape matches"))
}

/// Classical RBF Gram matrix over `points`.
pub fn rbf_gram(points: &[Vec<f64>], cfg: &RbfConfig) -> Result<KernelMatrix> {
    if points.is_empty() {
        return Err(usage("training point list is empty"));
    }
    let values = rbf_cross(points, points, cfg)?;
    Ok(KernelMatrix {
        mode: KernelMode::Exact,
        shots: 0,
        feature_map: None,
        rbf: Some(*cfg),
        values,
    })
}

/// Classical RBF kernel block `K[test_i][train_j]`.
pub fn rbf_cross(train: &[Vec<f64>], test: &[Vec<f64>], cfg: &RbfConfig) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((test.len(), train.len()));
    for (i, t) in test.iter().enumerate() {
        for (j, r) in train.iter().enumerate() {
            out[[i, j]] = rbf_kernel(t, r, cfg)?;
        }
    }
    Ok(out)
}

/// Nearest-PSD repair for symmetric matrices.
///
/// Eigenvalues below `floor` are raised to `floor`, the matrix is rebuilt,
/// and the unit diagonal is restored by `D^{-1/2} K D^{-1/2}`.
pub fn psd_project(k: &KernelMatrix, floor: f64) -> Result<KernelMatrix> {
    Ok(KernelMatrix {
        values: psd_project_values(&k.values, floor)?,
        ..k.clone()
    })
}

pub fn psd_project_values(values: &Array2<f64>, floor: f64) -> Result<Array2<f64>> {
    if !is_symmetric(values, 1e-9) {
        return Err(usage("psd_project needs a symmetric square matrix"));
    }
    let n = values.nrows();
    let eig = symmetric_eigen(values)?;
    let clamped = eig.values.mapv(|v| v.max(floor));
    let v = &eig.vectors;
    let mut rebuilt = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..n).map(|k| v[[i, k]] * clamped[k] * v[[j, k]]).sum();
            rebuilt[[i, j]] = s;
            rebuilt[[j, i]] = s;
        }
    }
    let scale: Vec<f64> = (0..n)
        .map(|i| {
            let d = rebuilt[[i, i]];
            if d > f64::EPSILON {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    for i in 0..n {
        for j in 0..n {
            rebuilt[[i, j]] *= scale[i] * scale[j];
        }
        rebuilt[[i, i]] = 1.0;
    }
    Ok(rebuilt)
}

impl KernelMatrix {
    pub fn size(&self) -> usize {
        self.values.nrows()
    }

    /// Row-major CSV with a header row of point indices.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_matrix_csv(&self.values, out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// CSV with header `0,1,…,ncols-1` and one line per row.
pub fn write_matrix_csv<W: Write>(m: &Array2<f64>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = (0..m.ncols()).map(|j| j.to_string()).collect();
    w.write_record(&header).map_err(csv_io)?;
    for row in m.rows() {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> crate::Error {
    crate::Error::Io(std::io::Error::other(e))
}

pub(crate) mod matrix_rows {
    use ndarray::Array2;
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Array2<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.rows().into_iter().map(|r| r.to_vec()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Array2<f64>, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Array2::from_shape_vec((rows.len(), ncols), flat).map_err(D::Error::custom)
    }
}
