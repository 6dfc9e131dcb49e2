//! Soft-margin SVM trained in the dual on a precomputed kernel.
//!
//! The dual problem is
//!
//! ```text
//! max  Σα − ½ ΣΣ αᵢ αⱼ yᵢ yⱼ K[i][j]    s.t. 0 ≤ α ≤ C,  Σ αᵢ yᵢ = 0
//! ```
//!
//! and the classifier is `sign(Σ yᵢ αᵢ K(x, xᵢ) − b)`.

use ndarray::{Array2, ArrayView1};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, usage, Error, Result};
use crate::featuremap::{FeatureMapConfig, RbfConfig};
use crate::rng::rng_from_seed;

/// Class label, `+1` or `-1`.
pub type Label = i8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmTrainConfig {
    #[serde(rename = "C")]
    pub c: f64,
    pub tol: f64,
    pub max_passes: usize,
    pub seed: u64,
}

impl Default for SvmTrainConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-3,
            max_passes: 50,
            seed: 0,
        }
    }
}

impl SvmTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(config(format!("C must be finite and > 0, got {}", self.c)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(config(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_passes == 0 {
            return Err(config("max_passes must be >= 1"));
        }
        Ok(())
    }
}

/// Which kernel produced the training matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSpec {
    Quantum(FeatureMapConfig),
    Rbf(RbfConfig),
    Precomputed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    /// Full sweeps over the training set.
    pub passes: usize,
    /// Accepted pair updates.
    pub updates: usize,
    /// Largest KKT violation at exit.
    pub max_kkt_violation: f64,
    pub converged: bool,
    pub dual_objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub alphas: Vec<f64>,
    pub labels: Vec<Label>,
    pub support_indices: Vec<usize>,
    pub bias: f64,
    pub config: SvmTrainConfig,
    pub feature_map: KernelSpec,
    /// Needed to rebuild kernel rows for new queries.
    #[serde(default)]
    pub training_points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<TrainStats>,
}

impl SvmModel {
    pub fn with_kernel(mut self, kernel: KernelSpec, training_points: Vec<Vec<f64>>) -> Self {
        self.feature_map = kernel;
        self.training_points = training_points;
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// `Σ yᵢ αᵢ k_row[i] − b`.
    pub fn decision_value(&self, k_row: &[f64]) -> Result<f64> {
        decision_value(self, k_row)
    }

    pub fn predict(&self, k_row: &[f64]) -> Result<Label> {
        predict(self, k_row)
    }

    /// Predictions for every row of a `[queries × training]` kernel block.
    pub fn predict_rows(&self, k: &Array2<f64>) -> Result<Vec<Label>> {
        k.rows()
            .into_iter()
            .map(|r| self.predict(&r.to_vec()))
            .collect()
    }
}

fn check_labels(y: &[Label]) -> Result<()> {
    if let Some(bad) = y.iter().find(|&&l| l != 1 && l != -1) {
        return Err(usage(format!("labels must be +1 or -1, got {bad}")));
    }
    let pos = y.iter().filter(|&&l| l == 1).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::Training("training labels contain a single class".into()));
    }
    Ok(())
}

fn check_kernel(k: &Array2<f64>, n: usize) -> Result<()> {
    if k.nrows() != k.ncols() {
        return Err(usage(format!("kernel is {}x{}, not square", k.nrows(), k.ncols())));
    }
    if k.nrows() != n {
        return Err(usage(format!("kernel has {} rows but {n} labels", k.nrows())));
    }
    if k.iter().any(|v| !v.is_finite()) {
        return Err(usage("kernel has non-finite entries"));
    }
    Ok(())
}

/// `Σα − ½ ΣΣ αᵢ αⱼ yᵢ yⱼ K[i][j]`.
pub fn dual_objective(alphas: &[f64], y: &[Label], k: &Array2<f64>) -> f64 {
    let n = alphas.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alphas[i] * alphas[j] * (y[i] * y[j]) as f64 * k[[i, j]];
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

/// `Σ αⱼ yⱼ K[i][j]` for training row `i`.
fn kernel_sum(alphas: &[f64], y: &[Label], row: ArrayView1<f64>) -> f64 {
    alphas
        .iter()
        .zip(y)
        .zip(row)
        .filter(|((a, _), _)| **a != 0.0)
        .map(|((a, &l), k)| a * l as f64 * k)
        .sum()
}

/// Bias `b` for the decision function `Σ αᵢ yᵢ K − b`: mean of
/// `Σ αᵢ yᵢ K[s][i] − y_s` over margin support vectors, or over all support
/// vectors when none lies strictly inside the box.
fn compute_bias(alphas: &[f64], y: &[Label], k: &Array2<f64>, c: f64) -> f64 {
    let eps = 1e-8 * c;
    let residual = |s: usize| kernel_sum(alphas, y, k.row(s)) - y[s] as f64;
    let margin: Vec<usize> = (0..alphas.len())
        .filter(|&s| alphas[s] > eps && alphas[s] < c - eps)
        .collect();
    let chosen = if margin.is_empty() {
        (0..alphas.len()).filter(|&s| alphas[s] > eps).collect()
    } else {
        margin
    };
    if chosen.is_empty() {
        return 0.0;
    }
    chosen.iter().map(|&s| residual(s)).sum::<f64>() / chosen.len() as f64
}

fn kkt_violation(alpha: f64, y: Label, f: f64, b: f64, c: f64) -> f64 {
    // Margin y·(f − b) must be ≥ 1 at α = 0, = 1 inside, ≤ 1 at α = C.
    let m = y as f64 * (f - b) - 1.0;
    let eps = 1e-8 * c;
    if alpha <= eps {
        (-m).max(0.0)
    } else if alpha >= c - eps {
        m.max(0.0)
    } else {
        m.abs()
    }
}

/// Trains with simplified SMO: every index violating KKT by more than
/// `tol` is paired with a seeded random partner and the pair is optimized
/// analytically. Stops after `max_passes` consecutive sweeps without an
/// update.
pub fn train_smo(k: &Array2<f64>, y: &[Label], cfg: &SvmTrainConfig) -> Result<SvmModel> {
    train_smo_observed(k, y, cfg, |_| {})
}

/// [`train_smo`], also returning the dual objective after each accepted
/// pair update.
pub fn train_smo_traced(
    k: &Array2<f64>,
    y: &[Label],
    cfg: &SvmTrainConfig,
) -> Result<(SvmModel, Vec<f64>)> {
    let mut trace = Vec::new();
    let model = train_smo_observed(k, y, cfg, |a| trace.push(dual_objective(a, y, k)))?;
    Ok((model, trace))
}

fn train_smo_observed(
    k: &Array2<f64>,
    y: &[Label],
    cfg: &SvmTrainConfig,
    mut on_update: impl FnMut(&[f64]),
) -> Result<SvmModel> {
    cfg.validate()?;
    check_kernel(k, y.len())?;
    check_labels(y)?;
    let n = y.len();
    let c = cfg.c;
    let yf: Vec<f64> = y.iter().map(|&l| l as f64).collect();
    let mut alphas = vec![0.0; n];
    // Working threshold in the convention f(x) = Σ αᵢ yᵢ K − b.
    let mut b = 0.0;
    let mut rng = rng_from_seed(cfg.seed);
    let step_eps = 1e-12 * c.max(1.0);
    let max_total_passes = cfg.max_passes.saturating_mul(200).max(1000);

    let mut idle_passes = 0;
    let mut passes = 0;
    let mut updates = 0;
    let err = |alphas: &[f64], b: f64, i: usize| kernel_sum(alphas, y, k.row(i)) - b - yf[i];

    while idle_passes < cfg.max_passes && passes < max_total_passes {
        passes += 1;
        let mut changed = 0;
        for i in 0..n {
            let ei = err(&alphas, b, i);
            let r = yf[i] * ei;
            if !((r < -cfg.tol && alphas[i] < c) || (r > cfg.tol && alphas[i] > 0.0)) {
                continue;
            }
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let ej = err(&alphas, b, j);
            let (ai_old, aj_old) = (alphas[i], alphas[j]);
            let (lo, hi) = if y[i] != y[j] {
                ((aj_old - ai_old).max(0.0), (c + aj_old - ai_old).min(c))
            } else {
                ((ai_old + aj_old - c).max(0.0), (ai_old + aj_old).min(c))
            };
            if hi - lo <= step_eps {
                continue;
            }
            let eta = 2.0 * k[[i, j]] - k[[i, i]] - k[[j, j]];
            let slope = yf[j] * (ei - ej);
            let aj_new = if eta < -1e-12 {
                (aj_old - slope / eta).clamp(lo, hi)
            } else {
                // Flat or convex along the constraint line: take the better end.
                let gain = |t: f64| slope * t + 0.5 * eta * t * t;
                let (gl, gh) = (gain(lo - aj_old), gain(hi - aj_old));
                if gl.max(gh) <= 1e-12 {
                    continue;
                }
                if gl > gh {
                    lo
                } else {
                    hi
                }
            };
            if (aj_new - aj_old).abs() <= step_eps {
                continue;
            }
            let ai_new = ai_old + yf[i] * yf[j] * (aj_old - aj_new);
            alphas[i] = ai_new.clamp(0.0, c);
            alphas[j] = aj_new;

            // Threshold update, in the f − b convention.
            let di = yf[i] * (alphas[i] - ai_old);
            let dj = yf[j] * (alphas[j] - aj_old);
            let b1 = b + ei + di * k[[i, i]] + dj * k[[i, j]];
            let b2 = b + ej + di * k[[i, j]] + dj * k[[j, j]];
            let inside = |a: f64| a > 0.0 && a < c;
            b = if inside(alphas[i]) {
                b1
            } else if inside(alphas[j]) {
                b2
            } else {
                0.5 * (b1 + b2)
            };
            changed += 1;
            updates += 1;
            on_update(&alphas);
        }
        if changed == 0 {
            idle_passes += 1;
        } else {
            idle_passes = 0;
        }
    }

    let bias = compute_bias(&alphas, y, k, c);
    let max_kkt_violation = (0..n)
        .map(|i| kkt_violation(alphas[i], y[i], kernel_sum(&alphas, y, k.row(i)), bias, c))
        .fold(0.0, f64::max);
    let support_indices = (0..n).filter(|&i| alphas[i] > cfg.tol).collect();
    let stats = TrainStats {
        passes,
        updates,
        max_kkt_violation,
        converged: idle_passes >= cfg.max_passes,
        dual_objective: dual_objective(&alphas, y, k),
    };
    if !stats.converged {
        log::warn!("SMO stopped after {passes} passes without settling");
    }
    Ok(SvmModel {
        alphas,
        labels: y.to_vec(),
        support_indices,
        bias,
        config: *cfg,
        feature_map: KernelSpec::Precomputed,
        training_points: Vec::new(),
        stats: Some(stats),
    })
}

/// Largest problem [`brute_force_dual`] accepts.
pub const ORACLE_MAX_DIM: usize = 8;

/// Projects `v` onto `{0 ≤ α ≤ C, Σ αᵢ yᵢ = 0}` by bisection on the
/// multiplier of the equality constraint.
fn project_feasible(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |lam: f64| -> Vec<f64> {
        v.iter()
            .zip(y)
            .map(|(vi, yi)| (vi - lam * yi).clamp(0.0, c))
            .collect()
    };
    let g = |lam: f64| at(lam).iter().zip(y).map(|(a, yi)| a * yi).sum::<f64>();
    let bound = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    // g is non-increasing in λ; g(lo) ≥ 0 ≥ g(hi).
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Reference dual solver for small problems: accelerated projected
/// gradient ascent on the dual, projecting onto the feasible set each step.
pub fn brute_force_dual(k: &Array2<f64>, y: &[Label], c: f64, steps: usize) -> Result<Vec<f64>> {
    check_kernel(k, y.len())?;
    let n = y.len();
    if n > ORACLE_MAX_DIM {
        return Err(usage(format!(
            "oracle handles at most {ORACLE_MAX_DIM} points, got {n}"
        )));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(config("C must be finite and > 0"));
    }
    let yf: Vec<f64> = y.iter().map(|&l| l as f64).collect();
    let q = Array2::from_shape_fn((n, n), |(i, j)| yf[i] * yf[j] * k[[i, j]]);
    let lipschitz = q.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
    let step = 1.0 / lipschitz;
    let objective = |a: &[f64]| {
        let quad: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i] * a[j] * q[[i, j]])
            .sum();
        a.iter().sum::<f64>() - 0.5 * quad
    };

    let mut x = vec![0.0; n];
    let mut z = x.clone();
    let mut t = 1.0f64;
    let mut fx = objective(&x);
    for _ in 0..steps {
        let grad: Vec<f64> = (0..n)
            .map(|i| 1.0 - (0..n).map(|j| q[[i, j]] * z[j]).sum::<f64>())
            .collect();
        let ascent: Vec<f64> = z.iter().zip(&grad).map(|(zi, gi)| zi + step * gi).collect();
        let x_next = project_feasible(&ascent, &yf, c);
        let f_next = objective(&x_next);
        if f_next < fx {
            // Momentum overshoot: restart from the last iterate.
            z = x.clone();
            t = 1.0;
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let w = (t - 1.0) / t_next;
        z = x_next
            .iter()
            .zip(&x)
            .map(|(xn, xo)| xn + w * (xn - xo))
            .collect();
        x = x_next;
        fx = f_next;
        t = t_next;
    }
    Ok(x)
}

pub fn decision_value(model: &SvmModel, k_row: &[f64]) -> Result<f64> {
    if k_row.len() != model.alphas.len() {
        return Err(usage(format!(
            "kernel row has {} entries, model has {} training points",
            k_row.len(),
            model.alphas.len()
        )));
    }
    let s: f64 = model
        .alphas
        .iter()
        .zip(&model.labels)
        .zip(k_row)
        .map(|((a, &l), k)| a * l as f64 * k)
        .sum();
    Ok(s - model.bias)
}

/// Sign of the decision value; exactly zero maps to `+1`.
pub fn predict(model: &SvmModel, k_row: &[f64]) -> Result<Label> {
    Ok(if decision_value(model, k_row)? >= 0.0 { 1 } else { -1 })
}

pub fn accuracy(predictions: &[Label], truth: &[Label]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(usage("accuracy of an empty prediction set"));
    }
    if predictions.len() != truth.len() {
        return Err(usage(format!(
            "{} predictions vs {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    let hits = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / predictions.len() as f64)
}
