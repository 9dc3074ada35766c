//! Exact CG energy errors from the spectrum.
//!
//! After `ℓ` steps of CG preconditioned by the scaled spectral
//! preconditioner with `k` exact eigenpairs,
//!
//! ```text
//! ‖x* − x_ℓ‖²_A = min_{q ∈ P_ℓ, q(0)=1}  Σ_{i≤k} η_i²/λ_i q(θ)² + Σ_{i>k} η_i²/λ_i q(λ_i)²
//! ```
//!
//! with `η = Sᵀr₀`. With `k = 0` this is plain CG.

use crate::error::{check_dim, Error, Result};
use crate::linops::{EigDecomposition, Vector};

/// Relative tolerance under which two nodes are merged.
const NODE_MERGE_RTOL: f64 = 1e-12;

/// `sqrt(min_{q(0)=1, deg q ≤ ℓ} Σ w_i q(t_i)²)` for positive nodes `t_i`.
///
/// Equal nodes are merged (weights added). The minimum is the distance of
/// `g = √w` to `span{Dg, …, D^ℓ g}` with `D = diag(t)`; an orthonormal basis
/// of that span is built by Arnoldi with repeated Gram–Schmidt, which stays
/// accurate where the monomial normal equations do not.
pub fn polynomial_min_residual(nodes: &[f64], weights: &[f64], ell: usize) -> Result<f64> {
    Ok(polynomial_min_residual_history(nodes, weights, ell)?[ell])
}

/// [`polynomial_min_residual`] for every degree `0..=max_ell`, sharing one
/// Arnoldi basis.
pub fn polynomial_min_residual_history(nodes: &[f64], weights: &[f64], max_ell: usize) -> Result<Vec<f64>> {
    check_dim(nodes.len(), weights.len())?;
    if nodes.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(Error::Argument("nodes must be positive and finite".into()));
    }
    if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::Argument("weights must be non-negative and finite".into()));
    }

    let mut pairs: Vec<(f64, f64)> =
        nodes.iter().zip(weights).filter(|(_, &w)| w > 0.0).map(|(&t, &w)| (t, w)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
    for (t, w) in pairs {
        match merged.last_mut() {
            Some(last) if (t - last.0).abs() <= NODE_MERGE_RTOL * t => last.1 += w,
            _ => merged.push((t, w)),
        }
    }

    let mut out = Vec::with_capacity(max_ell + 1);
    let scale = merged.iter().map(|p| p.0).fold(0.0, f64::max);
    let d = Vector::from_iterator(merged.len(), merged.iter().map(|p| p.0 / scale));
    let mut res = Vector::from_iterator(merged.len(), merged.iter().map(|p| p.1.sqrt()));
    out.push(res.norm());
    let mut basis: Vec<Vector> = Vec::with_capacity(max_ell.min(merged.len()));
    let mut next = d.component_mul(&res);
    for ell in 1..=max_ell {
        if ell >= merged.len() {
            out.push(0.0);
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&next);
                next.axpy(-c, q, 1.0);
            }
        }
        let nrm = next.norm();
        if nrm > 0.0 {
            let v = &next / nrm;
            next = d.component_mul(&v);
            basis.push(v);
        }
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&res);
                res.axpy(-c, q, 1.0);
            }
        }
        out.push(res.norm());
    }
    Ok(out)
}

/// Energy norm of the error after `ell` iterations of CG preconditioned with
/// `k` exact eigenpairs scaled to `theta` (plain CG for `k = 0`).
pub fn energy_error_oracle(eig: &EigDecomposition, r0: &Vector, k: usize, theta: f64, ell: usize) -> Result<f64> {
    Ok(energy_error_oracle_history(eig, r0, k, theta, ell)?[ell])
}

/// [`energy_error_oracle`] for every iteration `0..=max_ell`.
pub fn energy_error_oracle_history(
    eig: &EigDecomposition,
    r0: &Vector,
    k: usize,
    theta: f64,
    max_ell: usize,
) -> Result<Vec<f64>> {
    let n = eig.dim();
    check_dim(n, r0.len())?;
    if k >= n.max(1) {
        return Err(Error::Argument(format!("k = {k} must be below n = {n}")));
    }
    if k > 0 && !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Argument(format!("theta must be positive, got {theta}")));
    }
    let eta = eig.coefficients(r0);
    let nodes: Vec<f64> = (0..n).map(|i| if i < k { theta } else { eig.values[i] }).collect();
    let weights: Vec<f64> = (0..n).map(|i| eta[i] * eta[i] / eig.values[i]).collect();
    polynomial_min_residual_history(&nodes, &weights, max_ell)
}
