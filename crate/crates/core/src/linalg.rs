//! Symmetric eigendecomposition by the cyclic Jacobi method.

use ndarray::{Array1, Array2};

use crate::error::{usage, Error, Result};

/// Eigenpairs of a symmetric matrix, eigenvalues descending.
/// Column `k` of `vectors` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Array1<f64>,
    pub vectors: Array2<f64>,
}

const MAX_SWEEPS: usize = 100;

pub fn is_symmetric(a: &Array2<f64>, tol: f64) -> bool {
    let n = a.nrows();
    a.ncols() == n
        && (0..n).all(|i| (i + 1..n).all(|j| (a[[i, j]] - a[[j, i]]).abs() <= tol))
}

/// Cyclic Jacobi rotations until the off-diagonal mass is negligible
/// relative to the matrix norm.
pub fn symmetric_eigen(a: &Array2<f64>) -> Result<SymmetricEigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(usage(format!("eigen of non-square {}x{} matrix", n, a.ncols())));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(usage("eigen of matrix with non-finite entries"));
    }
    let mut m = a.clone();
    // Work on the symmetric part so tiny asymmetries cannot stall the sweep.
    for i in 0..n {
        for j in i + 1..n {
            let s = 0.5 * (m[[i, j]] + m[[j, i]]);
            m[[i, j]] = s;
            m[[j, i]] = s;
        }
    }
    let mut v = Array2::<f64>::eye(n);
    let total: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = (total * 1e-15).max(f64::MIN_POSITIVE);

    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| m[[i, j]] * m[[i, j]])
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                // signum(0.0) is 1.0, giving the 45° rotation for equal diagonals.
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::Internal(format!(
            "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].total_cmp(&m[[i, i]]));
    let values = Array1::from_iter(order.iter().map(|&i| m[[i, i]]));
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: &Array2<f64>) -> Result<f64> {
    let e = symmetric_eigen(a)?;
    Ok(e.values.iter().copied().fold(f64::INFINITY, f64::min))
}
