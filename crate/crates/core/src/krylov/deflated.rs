use nalgebra::DMatrix;

use super::trace::{DeflationDiagnostics, Recorder};
use super::{check_finite, converged, KrylovConfig, SolveTrace, TerminationReason, BREAKDOWN_THRESHOLD};
use crate::error::{check_dim, Error, Result};
use crate::linops::{is_zero, LinearOperator, Vector};

/// Deflated CG with deflation subspace `span(W)`.
///
/// The start is projected, `x₀ = x₋₁ + W(WᵀAW)⁻¹Wᵀr₋₁`, so that `Wᵀr₀ = 0`,
/// and every direction is corrected, `p_j = β p_{j−1} + r_j − W(WᵀAW)⁻¹WᵀAr_j`,
/// so that `WᵀAp_j = 0`. `AW` is formed once (`k` products, charged to `A`)
/// and reused for both `WᵀAW` and `WᵀAr_j = (AW)ᵀr_j`; afterwards each
/// iteration costs one product with `A`.
pub fn deflated_cg(
    a: &LinearOperator,
    w: &DMatrix<f64>,
    b: &Vector,
    x_minus1: &Vector,
    cfg: &KrylovConfig,
) -> Result<SolveTrace> {
    let n = a.dim();
    check_dim(n, w.nrows())?;
    check_dim(n, b.len())?;
    check_dim(n, x_minus1.len())?;
    cfg.validate(n)?;
    check_finite("b", b)?;
    check_finite("x_minus1", x_minus1)?;
    let k = w.ncols();

    let before = a.matvec_count();
    let mut aw = DMatrix::zeros(n, k);
    for j in 0..k {
        aw.set_column(j, &a.apply(&w.column(j).into_owned()));
    }
    let setup_matvecs = a.matvec_count() - before;
    let gram = w.tr_mul(&aw);
    let gram = (&gram + gram.transpose()) * 0.5;
    let chol = if k == 0 {
        None
    } else {
        Some(
            gram.clone()
                .cholesky()
                .ok_or_else(|| Error::DeflationSubspace("WᵀAW is not positive definite (W rank deficient?)".into()))?,
        )
    };
    let cond_ok = chol
        .as_ref()
        .map(|c| {
            let d = c.l().diagonal();
            let (mx, mn) = (d.max(), d.min());
            mn > 0.0 && (mx / mn).powi(2) < 1e15
        })
        .unwrap_or(true);
    if !cond_ok {
        return Err(Error::DeflationSubspace("WᵀAW is numerically singular".into()));
    }
    // μ = (WᵀAW)⁻¹ y
    let solve = |y: &Vector| -> Vector {
        match &chol {
            Some(c) => c.solve(y),
            None => Vector::zeros(0),
        }
    };

    let r_minus1 = if is_zero(x_minus1) { b.clone() } else { b - a.apply(x_minus1) };
    let mu = solve(&w.tr_mul(&r_minus1));
    let mut x = x_minus1 + w * &mu;
    let mut r = &r_minus1 - &aw * &mu;

    let mut diag = DeflationDiagnostics { setup_matvecs, ..Default::default() };
    let mut rec = Recorder::new("deflated_cg", a, cfg, cfg.record_lanczos);
    let bnorm = b.norm();
    let mut rho = r.dot(&r);
    let rnorm0 = rho.sqrt();
    rec.record(&x, &r, rho.sqrt());
    diag.wt_r.push(w.tr_mul(&r).norm());
    if rho.sqrt() <= cfg.rtol * bnorm {
        return Ok(rec.finish(x, TerminationReason::Rtol, cfg.record_lanczos, Some(diag)));
    }
    let mut p = &r - w * solve(&aw.tr_mul(&r));
    diag.wt_ap.push(aw.tr_mul(&p).norm());
    // With reorthogonalization the basis also spans `W`, so that roundoff
    // cannot reintroduce deflated components once the residual is tiny.
    let mut basis: Vec<Vector> = Vec::new();
    if cfg.reorthogonalize {
        if k > 0 {
            let q = w.clone().qr().q();
            basis.extend(q.column_iter().map(|c| c.into_owned()));
        }
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
        diag.wt_r.push(w.tr_mul(&r).norm());
        if converged(rnorm, rnorm0, bnorm, cfg.rtol) {
            reason = TerminationReason::Rtol;
            break;
        }
        if cfg.reorthogonalize {
            basis.push(&r / rnorm);
        }
        p *= beta;
        p += &r;
        p -= w * solve(&aw.tr_mul(&r));
        diag.wt_ap.push(aw.tr_mul(&p).norm());
        rho = rho_next;
    }
    Ok(rec.finish(x, reason, cfg.record_lanczos, Some(diag)))
}
