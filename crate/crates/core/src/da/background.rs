use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linops::Vector;

/// Default number of implicit diffusion steps in the correlation model.
pub const DIFFUSION_STEPS: u32 = 4;

/// Circulant background covariance on the cyclic grid.
///
/// The correlation is `M` implicit diffusion steps, `(I − κΔ)^{−M}`, with
/// `κ = ℓ²/(2M)` for length scale `ℓ` in grid points, rescaled so that every
/// variance equals `σ_b²`. Being circulant, `B`, its symmetric root `L` and
/// `B⁻¹` are all stored as first columns and applied by cyclic convolution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BackgroundCovariance {
    pub sigma_b: f64,
    pub length_scale: f64,
    pub diffusion_steps: u32,
    b_kernel: Vec<f64>,
    l_kernel: Vec<f64>,
    b_inv_kernel: Vec<f64>,
}

/// First column of the circulant with eigenvalues `mu` (symmetric in `j`).
fn kernel_from_spectrum(mu: &[f64]) -> Vec<f64> {
    let n = mu.len();
    (0..n)
        .map(|d| {
            let s: f64 = mu.iter().enumerate().map(|(j, m)| m * (2.0 * PI * (j * d % n) as f64 / n as f64).cos()).sum();
            s / n as f64
        })
        .collect()
}

fn circulant_apply(kernel: &[f64], v: &Vector) -> Vector {
    let n = kernel.len();
    Vector::from_fn(n, |i, _| {
        let mut s = 0.0;
        for (d, c) in kernel.iter().enumerate() {
            s += c * v[(i + n - d) % n];
        }
        s
    })
}

impl BackgroundCovariance {
    pub fn new(n: usize, sigma_b: f64, length_scale: f64) -> Result<Self> {
        Self::with_steps(n, sigma_b, length_scale, DIFFUSION_STEPS)
    }

    pub fn with_steps(n: usize, sigma_b: f64, length_scale: f64, diffusion_steps: u32) -> Result<Self> {
        if diffusion_steps == 0 || diffusion_steps > 64 {
            return Err(Error::Covariance(format!("diffusion_steps must be in 1..=64, got {diffusion_steps}")));
        }
        if n == 0 {
            return Err(Error::Covariance("n must be at least 1".into()));
        }
        if !(sigma_b > 0.0 && sigma_b.is_finite()) || !(length_scale >= 0.0 && length_scale.is_finite()) {
            return Err(Error::Covariance(format!(
                "need sigma_b > 0 and length_scale ≥ 0, got {sigma_b}, {length_scale}"
            )));
        }
        let m = diffusion_steps as f64;
        let kappa = length_scale * length_scale / (2.0 * m);
        let raw: Vec<f64> = (0..n)
            .map(|j| {
                let s = (PI * j as f64 / n as f64).sin();
                (1.0 + 4.0 * kappa * s * s).powi(-(diffusion_steps as i32))
            })
            .collect();
        let var = raw.iter().sum::<f64>() / n as f64;
        let mu: Vec<f64> = raw.iter().map(|r| r * sigma_b * sigma_b / var).collect();
        let (lo, hi) = mu.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if !(lo > 0.0) || !(hi / lo < 1e14) {
            return Err(Error::Covariance(format!("spectrum is not safely positive (min {lo:e}, max {hi:e})")));
        }
        let b_kernel = kernel_from_spectrum(&mu);
        let l_kernel = kernel_from_spectrum(&mu.iter().map(|x| x.sqrt()).collect::<Vec<_>>());
        let b_inv_kernel = kernel_from_spectrum(&mu.iter().map(|x| 1.0 / x).collect::<Vec<_>>());
        Ok(Self { sigma_b, length_scale, diffusion_steps, b_kernel, l_kernel, b_inv_kernel })
    }

    pub fn dim(&self) -> usize {
        self.b_kernel.len()
    }

    /// Correlation-scaled covariance at cyclic distance `d`.
    pub fn covariance_at(&self, d: usize) -> f64 {
        self.b_kernel[d % self.dim()]
    }

    pub fn apply_b(&self, v: &Vector) -> Result<Vector> {
        check_dim(self.dim(), v.len())?;
        Ok(circulant_apply(&self.b_kernel, v))
    }

    /// `L v` with the symmetric root `L = B^{1/2}`.
    pub fn apply_l(&self, v: &Vector) -> Result<Vector> {
        check_dim(self.dim(), v.len())?;
        Ok(circulant_apply(&self.l_kernel, v))
    }

    pub fn apply_b_inv(&self, v: &Vector) -> Result<Vector> {
        check_dim(self.dim(), v.len())?;
        Ok(circulant_apply(&self.b_inv_kernel, v))
    }

    fn dense(kernel: &[f64]) -> DMatrix<f64> {
        let n = kernel.len();
        DMatrix::from_fn(n, n, |i, j| kernel[(i + n - j) % n])
    }

    pub fn dense_b(&self) -> DMatrix<f64> {
        Self::dense(&self.b_kernel)
    }

    pub fn dense_l(&self) -> DMatrix<f64> {
        Self::dense(&self.l_kernel)
    }
}
