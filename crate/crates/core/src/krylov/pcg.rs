use nalgebra::DMatrix;

use super::trace::Recorder;
use super::{check_finite, converged, KrylovConfig, SolveTrace, TerminationReason, BREAKDOWN_THRESHOLD};
use crate::error::{check_dim, Error, Result};
use crate::linops::{is_zero, LinearOperator, Vector};

/// An SPD preconditioner `F ≈ A⁻¹`, applied as `z = F r`.
pub trait Preconditioner: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, r: &Vector) -> Vector;
}

impl<P: Preconditioner + ?Sized> Preconditioner for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, r: &Vector) -> Vector {
        (**self).apply(r)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IdentityPreconditioner(pub usize);

impl Preconditioner for IdentityPreconditioner {
    fn dim(&self) -> usize {
        self.0
    }
    fn apply(&self, r: &Vector) -> Vector {
        r.clone()
    }
}

/// Explicit dense `F`.
#[derive(Clone, Debug)]
pub struct DensePreconditioner(pub DMatrix<f64>);

impl Preconditioner for DensePreconditioner {
    fn dim(&self) -> usize {
        self.0.nrows()
    }
    fn apply(&self, r: &Vector) -> Vector {
        &self.0 * r
    }
}

/// Preconditioned CG. Only products with `F` are needed; with `F = UUᵀ` the
/// iterates coincide with CG on `UᵀAU y = Uᵀb` mapped back by `x̂ = U y`.
pub fn pcg<P: Preconditioner + ?Sized>(
    a: &LinearOperator,
    f: &P,
    b: &Vector,
    x0: &Vector,
    cfg: &KrylovConfig,
) -> Result<SolveTrace> {
    let n = a.dim();
    check_dim(n, f.dim())?;
    check_dim(n, b.len())?;
    check_dim(n, x0.len())?;
    cfg.validate(n)?;
    check_finite("b", b)?;
    check_finite("x0", x0)?;

    let mut rec = Recorder::new("pcg", a, cfg, false);
    let mut x = x0.clone();
    let mut r = if is_zero(x0) { b.clone() } else { b - a.apply(x0) };
    let bnorm = b.norm();
    let rnorm0 = r.dot(&r).sqrt();
    rec.record(&x, &r, rnorm0);
    if rnorm0 <= cfg.rtol * bnorm {
        return Ok(rec.finish(x, TerminationReason::Rtol, cfg.record_lanczos, None));
    }
    let mut z = f.apply(&r);
    let mut rho = r.dot(&z);
    if !(rho > 0.0) {
        return Err(Error::PreconditionerNotSpd { iteration: 0, value: rho });
    }
    let mut p = z.clone();
    // pairs (r_i, F r_i)/√ρ_i; PCG residuals are orthogonal in the F inner product
    let mut basis: Vec<(Vector, Vector)> = Vec::new();
    if cfg.reorthogonalize {
        basis.push((&r / rho.sqrt(), &z / rho.sqrt()));
    }

    let mut reason = TerminationReason::MaxIters;
    for l in 0..cfg.max_iters {
        let q = a.apply(&p);
        let pq = q.dot(&p);
        if !(pq > BREAKDOWN_THRESHOLD) {
            reason = TerminationReason::Breakdown;
            break;
        }
        let alpha = rho / pq;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &q, 1.0);
        if cfg.reorthogonalize {
            for _ in 0..2 {
                for (u, w) in &basis {
                    let c = w.dot(&r);
                    r.axpy(-c, u, 1.0);
                }
            }
        }
        let rnorm = r.dot(&r).sqrt();
        if converged(rnorm, rnorm0, bnorm, 0.0) {
            rec.alphas.push(alpha);
            rec.betas.push(0.0);
            rec.record(&x, &r, rnorm);
            reason = TerminationReason::Rtol;
            break;
        }
        z = f.apply(&r);
        let rho_next = r.dot(&z);
        if !(rho_next > 0.0) {
            return Err(Error::PreconditionerNotSpd { iteration: l + 1, value: rho_next });
        }
        let beta = rho_next / rho;
        rec.alphas.push(alpha);
        rec.betas.push(beta);
        rec.record(&x, &r, rnorm);
        if rnorm <= cfg.rtol * bnorm {
            reason = TerminationReason::Rtol;
            break;
        }
        if cfg.reorthogonalize {
            let s = rho_next.sqrt();
            basis.push((&r / s, &z / s));
        }
        p *= beta;
        p += &z;
        rho = rho_next;
    }
    Ok(rec.finish(x, reason, cfg.record_lanczos, None))
}
