use crate::error::{Error, Result};

/// Worst-case CG energy-error reduction `2((√κ−1)/(√κ+1))^ℓ`.
pub fn chebyshev_bound(kappa: f64, ell: usize) -> Result<f64> {
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(Error::Argument(format!("condition number must be finite and at least 1, got {kappa}")));
    }
    let s = kappa.sqrt();
    let rate = (s - 1.0) / (s + 1.0);
    Ok(2.0 * rate.powi(ell.min(i32::MAX as usize) as i32))
}
