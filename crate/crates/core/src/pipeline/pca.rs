use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{config, usage, Result};
use crate::linalg::symmetric_eigen;

/// Principal-component projection fitted on a training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaTransform {
    pub column_means: Vec<f64>,
    /// `k` orthonormal directions, one per row.
    pub components: Vec<Vec<f64>>,
    /// Variance along each component, descending.
    pub explained_variance: Vec<f64>,
}

/// Top-`k` eigenvectors of the sample covariance (denominator `n − 1`).
/// Each component is signed so its largest-magnitude entry is positive.
pub fn fit_pca(x: &Array2<f64>, k: usize) -> Result<PcaTransform> {
    let (n, d) = x.dim();
    if n < 2 {
        return Err(config(format!("PCA needs at least 2 rows, got {n}")));
    }
    if k == 0 || k > n.min(d) {
        return Err(config(format!(
            "cannot keep {k} components from a {n}x{d} matrix"
        )));
    }
    let means = x.mean_axis(Axis(0)).expect("n >= 2");
    let centered = x - &means;
    let cov = centered.t().dot(&centered) / (n as f64 - 1.0);
    let eig = symmetric_eigen(&cov)?;
    let components = (0..k)
        .map(|c| {
            let mut v = eig.vectors.column(c).to_vec();
            let lead = v
                .iter()
                .copied()
                .fold(0.0f64, |m, e| if e.abs() > m.abs() { e } else { m });
            if lead < 0.0 {
                v.iter_mut().for_each(|e| *e = -*e);
            }
            v
        })
        .collect();
    let explained_variance = eig.values.iter().take(k).map(|&v| v.max(0.0)).collect();
    Ok(PcaTransform {
        column_means: means.to_vec(),
        components,
        explained_variance,
    })
}

impl PcaTransform {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    fn component_matrix(&self) -> Array2<f64> {
        let d = self.column_means.len();
        Array2::from_shape_fn((self.n_components(), d), |(i, j)| self.components[i][j])
    }

    /// `(X − means) · componentsᵀ`.
    pub fn apply(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.column_means.len() {
            return Err(usage(format!(
                "PCA fitted on {} columns, got {}",
                self.column_means.len(),
                x.ncols()
            )));
        }
        let means = Array1::from(self.column_means.clone());
        Ok((x - &means).dot(&self.component_matrix().t()))
    }

    /// Maps projected coordinates back into the input space.
    pub fn inverse(&self, z: &Array2<f64>) -> Result<Array2<f64>> {
        if z.ncols() != self.n_components() {
            return Err(usage("inverse PCA dimension mismatch"));
        }
        let means = Array1::from(self.column_means.clone());
        Ok(z.dot(&self.component_matrix()) + &means)
    }
}

pub fn apply_pca(t: &PcaTransform, x: &Array2<f64>) -> Result<Array2<f64>> {
    t.apply(x)
}

/// Per-column z-scoring fitted on training data. Constant columns are
/// centred but not scaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Array2<f64>) -> Result<Self> {
        if x.nrows() < 2 {
            return Err(config("standardization needs at least 2 rows"));
        }
        let means = x.mean_axis(Axis(0)).expect("nonempty").to_vec();
        let stds = x.std_axis(Axis(0), 1.0).to_vec();
        Ok(Self { means, stds })
    }

    pub fn apply(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.means.len() {
            return Err(usage("standardizer column mismatch"));
        }
        let mut out = x.clone();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            let s = if self.stds[j] > 1e-12 { self.stds[j] } else { 1.0 };
            col.mapv_inplace(|v| (v - self.means[j]) / s);
        }
        Ok(out)
    }
}
