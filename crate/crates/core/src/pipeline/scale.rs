use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{config, usage, Result};

/// Shrink applied to the upper end so `[lo, hi)` stays half-open.
pub const OPEN_UPPER_SHRINK: f64 = 1e-9;

/// Per-column min-max record from the training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub lo: f64,
    pub hi: f64,
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(x: &Array2<f64>, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(config(format!("scale range [{lo}, {hi}) is empty")));
        }
        if x.nrows() == 0 {
            return Err(usage("cannot fit a scaler on zero rows"));
        }
        let mins = x
            .columns()
            .into_iter()
            .map(|c| c.iter().copied().fold(f64::INFINITY, f64::min))
            .collect();
        let maxs = x
            .columns()
            .into_iter()
            .map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect();
        Ok(Self { lo, hi, mins, maxs })
    }

    /// Affine map of each column into `[lo, lo + (hi − lo)(1 − 1e-9)]`.
    /// Constant training columns map to the midpoint. Values outside the
    /// training range are extrapolated, not clipped.
    pub fn apply(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.mins.len() {
            return Err(usage(format!(
                "scaler fitted on {} columns, got {}",
                self.mins.len(),
                x.ncols()
            )));
        }
        let span = (self.hi - self.lo) * (1.0 - OPEN_UPPER_SHRINK);
        let mut out = x.clone();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            let (mn, mx) = (self.mins[j], self.maxs[j]);
            if mx - mn <= f64::EPSILON * mx.abs().max(1.0) {
                col.fill(0.5 * (self.lo + self.hi));
            } else {
                col.mapv_inplace(|v| self.lo + (v - mn) / (mx - mn) * span);
            }
        }
        Ok(out)
    }
}

/// Fits on `x` and scales it; returns the record for reuse on test data.
pub fn scale_features(x: &Array2<f64>, lo: f64, hi: f64) -> Result<(Array2<f64>, MinMaxScaler)> {
    let scaler = MinMaxScaler::fit(x, lo, hi)?;
    Ok((scaler.apply(x)?, scaler))
}
