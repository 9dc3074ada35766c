use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::linops::{LinearOperator, MatvecLedger, Vector};

/// Header of the per-iteration CSV written by [`SolveTrace::to_csv`].
pub const TRACE_CSV_HEADER: &str = "iter,residual_norm,energy_error,alpha,beta,matvec_A1,matvec_A2";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    MaxIters,
    Rtol,
    Breakdown,
}

impl TerminationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::MaxIters => "max_iters",
            Self::Rtol => "rtol",
            Self::Breakdown => "breakdown",
        }
    }
}

/// Recurrence scalars and (optionally) the normalized residuals of a CG run,
/// i.e. the Lanczos coefficients and basis in disguise.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct LanczosData {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// `r_ℓ / ‖r_ℓ‖₂` for `ℓ = 0..=terminated_at`. Empty for PCG runs.
    #[serde(with = "crate::linops::flat::list")]
    pub residual_basis: Vec<Vector>,
}

/// Per-iteration orthogonality diagnostics of deflated CG.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DeflationDiagnostics {
    /// `‖Wᵀ r_j‖₂`
    pub wt_r: Vec<f64>,
    /// `‖Wᵀ A p_j‖₂`
    pub wt_ap: Vec<f64>,
    /// matvecs spent forming `AW` (and hence `WᵀAW`)
    pub setup_matvecs: usize,
}

/// Everything a Krylov run produced, iteration by iteration. Index `ℓ` of the
/// per-iterate lists refers to `x_ℓ`, with `ℓ = 0` the starting point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveTrace {
    pub solver: String,
    #[serde(with = "crate::linops::flat")]
    pub solution: Vector,
    #[serde(with = "crate::linops::flat::opt_list")]
    pub iterates: Option<Vec<Vector>>,
    pub residual_norms: Vec<f64>,
    /// `α_ℓ`, the step that produced `x_{ℓ+1}`.
    pub alphas: Vec<f64>,
    /// `β_{ℓ+1} = ρ_{ℓ+1}/ρ_ℓ`, stored at index `ℓ`.
    pub betas: Vec<f64>,
    pub energy_errors: Option<Vec<f64>>,
    pub matvec_counts: Vec<BTreeMap<String, usize>>,
    pub terminated_at: usize,
    pub termination_reason: TerminationReason,
    pub lanczos: Option<LanczosData>,
    pub deflation: Option<DeflationDiagnostics>,
}

impl SolveTrace {
    pub fn iterations(&self) -> usize {
        self.terminated_at
    }

    pub fn matvecs(&self, label: &str, iter: usize) -> Option<usize> {
        self.matvec_counts.get(iter).and_then(|m| m.get(label).copied())
    }

    /// CSV with [`TRACE_CSV_HEADER`]. Row `ℓ` carries `α_{ℓ-1}` and `β_ℓ`,
    /// the scalars that produced `x_ℓ` and `p_ℓ`; unavailable fields are
    /// left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{TRACE_CSV_HEADER}");
        for l in 0..=self.terminated_at {
            let energy = self.energy_errors.as_ref().and_then(|e| e.get(l).copied());
            let alpha = l.checked_sub(1).and_then(|i| self.alphas.get(i).copied());
            let beta = l.checked_sub(1).and_then(|i| self.betas.get(i).copied());
            let mv = |label: &str| self.matvecs(label, l).map(|c| c.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                l,
                fmt_f64(self.residual_norms[l]),
                fmt_opt(energy),
                fmt_opt(alpha),
                fmt_opt(beta),
                mv("A1"),
                mv("A2"),
            );
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Shared bookkeeping for the three solvers.
pub(crate) struct Recorder<'a> {
    solver: &'static str,
    op: &'a LinearOperator,
    exact: Option<&'a Vector>,
    ledger: MatvecLedger,
    record_iterates: bool,
    record_basis: bool,
    iterates: Vec<Vector>,
    residual_norms: Vec<f64>,
    energy: Vec<f64>,
    matvecs: Vec<BTreeMap<String, usize>>,
    basis: Vec<Vector>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl<'a> Recorder<'a> {
    pub fn new(solver: &'static str, op: &'a LinearOperator, cfg: &'a super::KrylovConfig, record_basis: bool) -> Self {
        let mut ledger = cfg.watch.clone();
        ledger.watch(op.counter());
        Self {
            solver,
            op,
            exact: cfg.exact_solution.as_ref(),
            ledger,
            record_iterates: cfg.record_iterates,
            record_basis,
            iterates: Vec::new(),
            residual_norms: Vec::new(),
            energy: Vec::new(),
            matvecs: Vec::new(),
            basis: Vec::new(),
            alphas: Vec::new(),
            betas: Vec::new(),
        }
    }

    pub fn record(&mut self, x: &Vector, r: &Vector, rnorm: f64) {
        self.residual_norms.push(rnorm);
        self.matvecs.push(self.ledger.snapshot());
        if self.record_iterates {
            self.iterates.push(x.clone());
        }
        if let Some(xs) = self.exact {
            let e = xs - x;
            let q = e.dot(&self.op.apply_uncounted(&e));
            self.energy.push(q.max(0.0).sqrt());
        }
        if self.record_basis && rnorm > 0.0 {
            self.basis.push(r / rnorm);
        }
    }

    pub fn finish(
        self,
        solution: Vector,
        reason: TerminationReason,
        record_lanczos: bool,
        deflation: Option<DeflationDiagnostics>,
    ) -> SolveTrace {
        let terminated_at = self.residual_norms.len() - 1;
        let lanczos = record_lanczos.then(|| LanczosData {
            alphas: self.alphas.clone(),
            betas: self.betas.clone(),
            residual_basis: self.basis,
        });
        SolveTrace {
            solver: self.solver.to_string(),
            solution,
            iterates: self.record_iterates.then_some(self.iterates),
            residual_norms: self.residual_norms,
            alphas: self.alphas,
            betas: self.betas,
            energy_errors: self.exact.map(|_| self.energy),
            matvec_counts: self.matvecs,
            terminated_at,
            termination_reason: reason,
            lanczos,
            deflation,
        }
    }
}
