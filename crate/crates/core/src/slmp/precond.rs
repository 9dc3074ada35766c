use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::krylov::Preconditioner;
use crate::linops::{is_zero, LinearOperator, Vector};

use super::SpectralBasis;

/// `F_θ = U_θ²` built from a [`SpectralBasis`].
#[derive(Clone, Debug)]
pub struct ScaledSpectralPreconditioner {
    basis: SpectralBasis,
    theta: f64,
    f_coef: Vec<f64>,
    u_coef: Vec<f64>,
    u_inv_coef: Vec<f64>,
}

impl ScaledSpectralPreconditioner {
    pub fn new(basis: SpectralBasis, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::Argument(format!("theta must be positive and finite, got {theta}")));
        }
        let vals = basis.values();
        let f_coef = vals.iter().map(|&l| theta / l - 1.0).collect();
        let u_coef = vals.iter().map(|&l| (theta / l).sqrt() - 1.0).collect();
        let u_inv_coef = vals.iter().map(|&l| (l / theta).sqrt() - 1.0).collect();
        Ok(Self { basis, theta, f_coef, u_coef, u_inv_coef })
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn apply_f(&self, v: &Vector) -> Vector {
        self.basis.rank_k_update(v, &self.f_coef)
    }

    pub fn apply_u(&self, v: &Vector) -> Vector {
        self.basis.rank_k_update(v, &self.u_coef)
    }

    pub fn apply_u_inverse(&self, v: &Vector) -> Vector {
        self.basis.rank_k_update(v, &self.u_inv_coef)
    }
}

impl Preconditioner for ScaledSpectralPreconditioner {
    fn dim(&self) -> usize {
        self.basis.dim()
    }
    fn apply(&self, r: &Vector) -> Vector {
        self.apply_f(r)
    }
}

/// Product `U = U₁U₂⋯U_{j−1}` of first-level factors, oldest outermost.
///
/// The system of loop `j` is `UᵀA⁽ʲ⁾U y = Uᵀb⁽ʲ⁾` with `x = U y`, which is
/// PCG on `A⁽ʲ⁾` with `F = UUᵀ`. Each factor is symmetric, so `Uᵀ` applies
/// the same factors in the opposite order.
#[derive(Clone, Debug, Default)]
pub struct ComposedPreconditioner {
    levels: Vec<ScaledSpectralPreconditioner>,
}

impl ComposedPreconditioner {
    pub fn levels(&self) -> &[ScaledSpectralPreconditioner] {
        &self.levels
    }

    pub fn push(&mut self, p: ScaledSpectralPreconditioner) -> Result<()> {
        if let Some(first) = self.levels.first() {
            check_dim(first.dim(), p.dim())?;
        }
        self.levels.push(p);
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// `U v = U₁(U₂(⋯U_{j−1}v))`.
    pub fn apply_u(&self, v: &Vector) -> Vector {
        self.levels.iter().rev().fold(v.clone(), |acc, p| p.apply_u(&acc))
    }

    /// `Uᵀ v = U_{j−1}(⋯U₁v)`.
    pub fn apply_ut(&self, v: &Vector) -> Vector {
        self.levels.iter().fold(v.clone(), |acc, p| p.apply_u(&acc))
    }

    /// `U⁻¹ v`.
    pub fn apply_u_inverse(&self, v: &Vector) -> Vector {
        self.levels.iter().fold(v.clone(), |acc, p| p.apply_u_inverse(&acc))
    }

    /// `F v = U Uᵀ v`.
    pub fn apply_f(&self, v: &Vector) -> Vector {
        self.apply_u(&self.apply_ut(v))
    }
}

impl Preconditioner for ComposedPreconditioner {
    fn dim(&self) -> usize {
        self.levels.first().map(|p| p.dim()).unwrap_or(0)
    }
    fn apply(&self, r: &Vector) -> Vector {
        self.apply_f(r)
    }
}

pub fn compose(precs: &[ScaledSpectralPreconditioner]) -> Result<ComposedPreconditioner> {
    let mut c = ComposedPreconditioner::default();
    for p in precs {
        c.push(p.clone())?;
    }
    Ok(c)
}

/// `UᵀAU` as an operator. Each product costs one product with `a`, which is
/// counted on `a`'s own counter as well.
pub fn split_operator(
    a: &LinearOperator,
    u: &ComposedPreconditioner,
    label: impl Into<String>,
) -> Result<LinearOperator> {
    if !u.is_empty() {
        check_dim(a.dim(), u.dim())?;
    }
    let a = a.clone();
    let u = Arc::new(u.clone());
    Ok(LinearOperator::new(label, a.dim(), move |v| u.apply_ut(&a.apply(&u.apply_u(v)))))
}

/// `x₀ + S_kΛ_k⁻¹S_kᵀ(b − Ax₀)`. Costs one product with `a` unless `x0 = 0`.
pub fn deflation_initial_guess(basis: &SpectralBasis, a: &LinearOperator, b: &Vector, x0: &Vector) -> Result<Vector> {
    check_dim(basis.dim(), a.dim())?;
    check_dim(a.dim(), b.len())?;
    check_dim(a.dim(), x0.len())?;
    let r0 = if is_zero(x0) { b.clone() } else { b - a.apply(x0) };
    let inv: Vec<f64> = basis.values().iter().map(|l| 1.0 / l).collect();
    Ok(x0 + basis.rank_k_apply(&r0, &inv))
}

/// `U_θ⁻¹S_kΛ_k⁻¹S_kᵀ b`: a start for the split system whose image `U_θ x₀`
/// is the deflation guess from zero.
pub fn init_slmp_guess(prec: &ScaledSpectralPreconditioner, b_new: &Vector) -> Result<Vector> {
    check_dim(prec.dim(), b_new.len())?;
    let inv: Vec<f64> = prec.basis().values().iter().map(|l| 1.0 / l).collect();
    Ok(prec.apply_u_inverse(&prec.basis().rank_k_apply(b_new, &inv)))
}
