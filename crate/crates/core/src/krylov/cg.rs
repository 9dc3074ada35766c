use super::trace::Recorder;
use super::{check_finite, converged, KrylovConfig, SolveTrace, TerminationReason, BREAKDOWN_THRESHOLD};
use crate::error::{check_dim, Result};
use crate::linops::{is_zero, LinearOperator, Vector};

/// Hestenes–Stiefel conjugate gradients on `Ax = b` from `x0`.
///
/// ```text
/// r₀ = b − Ax₀,  ρ₀ = r₀ᵀr₀,  p₀ = r₀
/// q_ℓ = Ap_ℓ,  α_ℓ = ρ_ℓ / q_ℓᵀp_ℓ
/// x_{ℓ+1} = x_ℓ + α_ℓ p_ℓ,  r_{ℓ+1} = r_ℓ − α_ℓ q_ℓ
/// β_{ℓ+1} = ρ_{ℓ+1}/ρ_ℓ,  p_{ℓ+1} = r_{ℓ+1} + β_{ℓ+1} p_ℓ
/// ```
pub fn cg(a: &LinearOperator, b: &Vector, x0: &Vector, cfg: &KrylovConfig) -> Result<SolveTrace> {
    let n = a.dim();
    check_dim(n, b.len())?;
    check_dim(n, x0.len())?;
    cfg.validate(n)?;
    check_finite("b", b)?;
    check_finite("x0", x0)?;

    let mut rec = Recorder::new("cg", a, cfg, cfg.record_lanczos);
    let mut x = x0.clone();
    let mut r = if is_zero(x0) { b.clone() } else { b - a.apply(x0) };
    let bnorm = b.norm();
    let mut rho = r.dot(&r);
    let rnorm0 = rho.sqrt();
    rec.record(&x, &r, rho.sqrt());
    if rho.sqrt() <= cfg.rtol * bnorm {
        return Ok(rec.finish(x, TerminationReason::Rtol, cfg.record_lanczos, None));
    }
    let mut p = r.clone();
    let mut basis: Vec<Vector> = Vec::new();
    if cfg.reorthogonalize {
        basis.push(&r / rho.sqrt());
    }

    let mut reason = TerminationReason::MaxIters;
    for _ in 0..cfg.max_iters {
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
                for v in &basis {
                    let c = v.dot(&r);
                    r.axpy(-c, v, 1.0);
                }
            }
        }
        let rho_next = r.dot(&r);
        let beta = rho_next / rho;
        rec.alphas.push(alpha);
        rec.betas.push(beta);
        let rnorm = rho_next.sqrt();
        rec.record(&x, &r, rnorm);
        if converged(rnorm, rnorm0, bnorm, cfg.rtol) {
            reason = TerminationReason::Rtol;
            break;
        }
        if cfg.reorthogonalize {
            basis.push(&r / rnorm);
        }
        p *= beta;
        p += &r;
        rho = rho_next;
    }
    Ok(rec.finish(x, reason, cfg.record_lanczos, None))
}
