//! Ritz pairs from the CG recurrence.
//!
//! With `v_j = r_j/‖r_j‖` the CG scalars define the Lanczos tridiagonal
//!
//! ```text
//! T[0,0]   = 1/α₀
//! T[j,j]   = 1/α_j + β_j/α_{j−1}
//! T[j−1,j] = −√β_j / α_{j−1}
//! ```
//!
//! and `A V_m = V_m T_m + t_m v_m e_mᵀ` with `t_m = √β_m / α_{m−1}`, so the
//! residual of a Ritz pair `(θ, V_m u)` is `t_m |e_mᵀu|`.
//!
//! No reorthogonalization is performed during CG. Once Ritz values converge
//! the residual basis loses orthogonality and converged values can reappear
//! as copies; copies are dropped here and the kept vectors are
//! re-orthonormalized, largest values first.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::LanczosData;
use crate::error::{check_dim, Error, Result};
use crate::linops::{symmetric_eig_sorted, LinearOperator, Vector};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RitzPairs {
    /// Decreasing Ritz values.
    pub values: Vec<f64>,
    /// Orthonormal Ritz vectors, one column per value.
    pub vectors: DMatrix<f64>,
    /// `t_m |e_mᵀu|`, the a-posteriori residual estimate of each pair.
    pub residual_bounds: Vec<f64>,
}

impl RitzPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn tridiagonal(ld: &LanczosData) -> Result<(DMatrix<f64>, f64)> {
    let m = ld.alphas.len();
    if m == 0 {
        return Err(Error::Argument("empty Lanczos data".into()));
    }
    if ld.betas.len() < m {
        return Err(Error::Argument("Lanczos data has fewer betas than alphas".into()));
    }
    let (a, b) = (&ld.alphas, &ld.betas);
    let mut t = DMatrix::zeros(m, m);
    t[(0, 0)] = 1.0 / a[0];
    for j in 1..m {
        t[(j, j)] = 1.0 / a[j] + b[j - 1] / a[j - 1];
        let off = -b[j - 1].sqrt() / a[j - 1];
        t[(j - 1, j)] = off;
        t[(j, j - 1)] = off;
    }
    let tail = b[m - 1].sqrt() / a[m - 1];
    Ok((t, tail))
}

/// All Ritz values of the recorded run, decreasing.
pub fn ritz_values(ld: &LanczosData) -> Result<Vec<f64>> {
    let (t, _) = tridiagonal(ld)?;
    Ok(symmetric_eig_sorted(&t).0.iter().copied().collect())
}

/// Selects up to `k_max` Ritz pairs whose residual estimate is at most
/// `eps` times their own value, largest values first.
///
/// `a` is only used to check the dimension; no products are taken.
pub fn extract_ritz_pairs(ld: &LanczosData, a: &LinearOperator, eps: f64, k_max: usize) -> Result<RitzPairs> {
    let (t, tail) = tridiagonal(ld)?;
    let m = t.nrows();
    if ld.residual_basis.len() < m {
        return Err(Error::Argument(format!(
            "Lanczos basis holds {} vectors, {m} needed (was record_lanczos on for a CG run?)",
            ld.residual_basis.len()
        )));
    }
    let n = ld.residual_basis[0].len();
    check_dim(a.dim(), n)?;

    let (vals, u) = symmetric_eig_sorted(&t);
    let mut kept_vals = Vec::new();
    let mut kept_bounds = Vec::new();
    let mut kept_vecs: Vec<Vector> = Vec::new();
    for i in 0..m {
        if kept_vals.len() >= k_max {
            break;
        }
        let theta = vals[i];
        let bound = tail * u[(m - 1, i)].abs();
        if !(theta > 0.0) || bound > eps * theta {
            continue;
        }
        let mut y = Vector::zeros(n);
        for j in 0..m {
            y.axpy(u[(j, i)], &ld.residual_basis[j], 1.0);
        }
        let raw = y.norm();
        for _ in 0..2 {
            for q in &kept_vecs {
                let c = q.dot(&y);
                y.axpy(-c, q, 1.0);
            }
        }
        let left = y.norm();
        if left < 0.5 * raw {
            // copy of an already accepted pair
            continue;
        }
        kept_vecs.push(y / left);
        kept_vals.push(theta);
        kept_bounds.push(bound);
    }
    let vectors = if kept_vecs.is_empty() { DMatrix::zeros(n, 0) } else { DMatrix::from_columns(&kept_vecs) };
    Ok(RitzPairs { values: kept_vals, vectors, residual_bounds: kept_bounds })
}
