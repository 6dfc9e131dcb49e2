//! Z and ZZ feature-map circuits and the classical RBF baseline.
//!
//! Both maps repeat a layer `reps` times. A Z layer is H on every qubit
//! followed by `PHASE(2·φ(xᵢ))` on qubit `i`. A ZZ layer adds, for every
//! entangled pair `i < j` in lexicographic order, the block
//! `CNOT(i→j) · PHASE(2·φ(xᵢ, xⱼ)) on j · CNOT(i→j)`, which applies
//! `exp(-i·φ(xᵢ,xⱼ)·Zᵢ⊗Zⱼ)` up to global phase.
//!
//! Inputs are used as given; scaling into an angle range is the caller's job.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{config, usage, Result};
use crate::sim::{Circuit, Gate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureMapKind {
    Z,
    ZZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entanglement {
    Full,
    Linear,
}

fn default_reps() -> usize {
    2
}

fn default_entanglement() -> Entanglement {
    Entanglement::Full
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMapConfig {
    pub kind: FeatureMapKind,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_entanglement")]
    pub entanglement: Entanglement,
    pub n_features: usize,
}

impl FeatureMapConfig {
    pub fn zz(n_features: usize) -> Self {
        Self {
            kind: FeatureMapKind::ZZ,
            reps: default_reps(),
            entanglement: default_entanglement(),
            n_features,
        }
    }

    pub fn z(n_features: usize) -> Self {
        Self {
            kind: FeatureMapKind::Z,
            ..Self::zz(n_features)
        }
    }

    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    pub fn with_entanglement(mut self, entanglement: Entanglement) -> Self {
        self.entanglement = entanglement;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(config("feature map reps must be >= 1"));
        }
        if self.n_features == 0 {
            return Err(config("feature map needs at least one feature"));
        }
        if self.kind == FeatureMapKind::ZZ && self.n_features < 2 {
            return Err(config("ZZ feature map needs at least 2 features"));
        }
        Ok(())
    }

    /// Entangled pairs `(i, j)`, `i < j`, in lexicographic order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n_features;
        match self.entanglement {
            Entanglement::Full => (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .collect(),
            Entanglement::Linear => (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
        }
    }

    /// Builds the circuit for `x` according to `kind`.
    pub fn circuit(&self, x: &[f64]) -> Result<Circuit> {
        match self.kind {
            FeatureMapKind::Z => build_z_feature_map(x, self),
            FeatureMapKind::ZZ => build_zz_feature_map(x, self),
        }
    }
}

/// Single-feature map: the identity.
#[inline]
pub fn phi1(x: f64) -> f64 {
    x
}

/// Pair map `(π − x)(π − y)`.
#[inline]
pub fn phi2(x: f64, y: f64) -> f64 {
    (PI - x) * (PI - y)
}

fn check_point(x: &[f64], cfg: &FeatureMapConfig) -> Result<()> {
    cfg.validate()?;
    if x.len() != cfg.n_features {
        return Err(usage(format!(
            "data point has {} features, feature map expects {}",
            x.len(),
            cfg.n_features
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(usage("data point contains a non-finite feature"));
    }
    Ok(())
}

fn push_single_layer(c: &mut Circuit, x: &[f64]) -> Result<()> {
    for q in 0..x.len() {
        c.push(Gate::h(q))?;
    }
    for (q, &xi) in x.iter().enumerate() {
        c.push(Gate::phase(q, 2.0 * phi1(xi)))?;
    }
    Ok(())
}

pub fn build_z_feature_map(x: &[f64], cfg: &FeatureMapConfig) -> Result<Circuit> {
    if cfg.kind != FeatureMapKind::Z {
        return Err(usage("build_z_feature_map called with a non-Z config"));
    }
    check_point(x, cfg)?;
    let mut c = Circuit::new(cfg.n_features);
    for _ in 0..cfg.reps {
        push_single_layer(&mut c, x)?;
    }
    Ok(c)
}

pub fn build_zz_feature_map(x: &[f64], cfg: &FeatureMapConfig) -> Result<Circuit> {
    if cfg.kind != FeatureMapKind::ZZ {
        return Err(usage("build_zz_feature_map called with a non-ZZ config"));
    }
    check_point(x, cfg)?;
    let pairs = cfg.pairs();
    let mut c = Circuit::new(cfg.n_features);
    for _ in 0..cfg.reps {
        push_single_layer(&mut c, x)?;
        for &(i, j) in &pairs {
            c.push(Gate::cnot(i, j))?;
            c.push(Gate::phase(j, 2.0 * phi2(x[i], x[j])))?;
            c.push(Gate::cnot(i, j))?;
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbfConfig {
    pub sigma: f64,
}

impl Default for RbfConfig {
    fn default() -> Self {
        Self { sigma: 1.0 }
    }
}

/// `exp(−‖x1 − x2‖² / (2σ²))`.
pub fn rbf_kernel(x1: &[f64], x2: &[f64], cfg: &RbfConfig) -> Result<f64> {
    if !(cfg.sigma.is_finite() && cfg.sigma > 0.0) {
        return Err(config(format!("rbf sigma must be finite and > 0, got {}", cfg.sigma)));
    }
    if x1.len() != x2.len() {
        return Err(usage(format!(
            "rbf kernel on points of length {} and {}",
            x1.len(),
            x2.len()
        )));
    }
    let d2: f64 = x1.iter().zip(x2).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((-d2 / (2.0 * cfg.sigma * cfg.sigma)).exp())
}
