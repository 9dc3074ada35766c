use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{DAProblem, Trajectory};
use crate::error::{check_dim, Error, Result};
use crate::krylov::{cg, deflated_cg, extract_ritz_pairs, fmt_f64, KrylovConfig, RitzPairs, SolveTrace};
use crate::linops::{LinearOperator, MatvecLedger, Vector};
use crate::slmp::{
    init_slmp_guess, resolve_theta, split_operator, ComposedPreconditioner, ScaledSpectralPreconditioner,
    SpectralBasis, ThetaStrategy,
};

/// Outer-loop state. The iterate is kept in control variables,
/// `w₀ = w_b + L v`, so the background term of the quadratic is `½‖x + v‖²`.
#[derive(Clone, Debug)]
pub struct GNState {
    pub outer_index: usize,
    pub v: Vector,
    pub w0: Vector,
    pub innovations: Vec<Vector>,
    trajectory: Trajectory,
}

impl GNState {
    /// First outer loop, linearized at the background.
    pub fn initial(prob: &DAProblem) -> Result<Self> {
        Self::at(prob, 1, Vector::zeros(prob.dim()))
    }

    fn at(prob: &DAProblem, outer_index: usize, v: Vector) -> Result<Self> {
        let w0 = &prob.w_b + prob.bcov.apply_l(&v)?;
        let trajectory = prob.trajectory(&w0)?;
        let innovations = prob.innovations(&trajectory);
        Ok(Self { outer_index, v, w0, innovations, trajectory })
    }

    /// Next outer loop after the increment `x` (first-level variables).
    pub fn advance(&self, prob: &DAProblem, x: &Vector) -> Result<Self> {
        check_dim(prob.dim(), x.len())?;
        Self::at(prob, self.outer_index + 1, &self.v + x)
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    /// `Q(Lx) = ½‖x + v‖² + ½ Σ ‖G_i L x − d_i‖² / σ_r²`, evaluated directly
    /// (no operator products are charged).
    pub fn quadratic_cost(&self, prob: &DAProblem, x: &Vector) -> Result<f64> {
        let s = prob.bcov.apply_l(x)?;
        let gs = prob.linearized_obs(&self.trajectory, &s)?;
        let s2 = prob.obs.sigma_r * prob.obs.sigma_r;
        let jo: f64 = gs.iter().zip(&self.innovations).map(|(g, d)| (g - d).norm_squared()).sum::<f64>() / s2;
        Ok(0.5 * ((x + &self.v).norm_squared() + jo))
    }
}

/// `A = I + L GᵀR⁻¹G L` as an operator labelled `A{j}` (one tangent-linear
/// and one adjoint run per product) and `b = −v + L GᵀR⁻¹d`.
pub fn assemble_system(prob: &Arc<DAProblem>, state: &GNState) -> Result<(LinearOperator, Vector)> {
    state.trajectory.check_linearization(&state.w0)?;
    let n = prob.dim();
    let s2 = prob.obs.sigma_r * prob.obs.sigma_r;
    let rinv_d: Vec<Vector> = state.innovations.iter().map(|d| d / s2).collect();
    let b = prob.bcov.apply_l(&prob.linearized_obs_adjoint(&state.trajectory, &rinv_d)?)? - &state.v;

    let p = Arc::clone(prob);
    let traj = state.trajectory.clone();
    let op = LinearOperator::new(format!("A{}", state.outer_index), n, move |x| {
        let lx = p.bcov.apply_l(x).expect("dimension checked by the operator");
        let g: Vec<Vector> = p.linearized_obs(&traj, &lx).expect("trajectory matches").iter().map(|y| y / s2).collect();
        let back = p.linearized_obs_adjoint(&traj, &g).expect("trajectory matches");
        x + p.bcov.apply_l(&back).expect("dimension checked by the operator")
    });
    Ok((op, b))
}

/// The compared strategies for loops after the first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MethodSpec {
    BPrec,
    SlmpBase,
    InitSlmpBase,
    SlmpLambdaK,
    SlmpThetaR,
    SlmpThetaM,
    DefCg,
}

impl MethodSpec {
    pub const ALL: [MethodSpec; 7] = [
        Self::BPrec,
        Self::SlmpBase,
        Self::InitSlmpBase,
        Self::SlmpLambdaK,
        Self::SlmpThetaR,
        Self::SlmpThetaM,
        Self::DefCg,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Self::BPrec => "BPrec",
            Self::SlmpBase => "sLMP-Base",
            Self::InitSlmpBase => "Init-sLMP-Base",
            Self::SlmpLambdaK => "sLMP-lambdak",
            Self::SlmpThetaR => "sLMP-thetar",
            Self::SlmpThetaM => "sLMP-thetam",
            Self::DefCg => "DefCG",
        }
    }

    /// Scaling strategy of the spectral preconditioner, if one is used.
    pub fn theta_strategy(&self) -> Option<ThetaStrategy> {
        match self {
            Self::SlmpBase | Self::InitSlmpBase => Some(ThetaStrategy::One),
            Self::SlmpLambdaK => Some(ThetaStrategy::LambdaK),
            Self::SlmpThetaR => Some(ThetaStrategy::ThetaR),
            Self::SlmpThetaM => Some(ThetaStrategy::MidRange),
            Self::BPrec | Self::DefCg => None,
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.trim().to_lowercase().chars().filter(|c| !matches!(c, '-' | '_' | ' ')).collect();
        Ok(match key.as_str() {
            "bprec" => Self::BPrec,
            "slmpbase" => Self::SlmpBase,
            "initslmpbase" => Self::InitSlmpBase,
            "slmplambdak" | "slmpλk" => Self::SlmpLambdaK,
            "slmpthetar" | "slmpθr" => Self::SlmpThetaR,
            "slmpthetam" | "slmpθm" => Self::SlmpThetaM,
            "defcg" => Self::DefCg,
            _ => return Err(Error::UnknownMethod(s.trim().to_string())),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussNewtonConfig {
    pub outer_loops: usize,
    pub inner_iters: usize,
    /// Ritz pairs are kept when their residual estimate is below
    /// `ritz_eps` times their value.
    pub ritz_eps: f64,
    pub ritz_max: usize,
    /// Smallest eigenvalue assumed by the mid-range scaling.
    pub lambda_n_hint: f64,
    /// Full reorthogonalization of the CG residuals.
    pub reorthogonalize: bool,
}

impl Default for GaussNewtonConfig {
    fn default() -> Self {
        Self {
            outer_loops: 2,
            inner_iters: 100,
            ritz_eps: 1e-3,
            ritz_max: 200,
            lambda_n_hint: 1.0,
            reorthogonalize: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LoopResult {
    pub outer_loop: usize,
    /// `θ` of the preconditioner level added for this loop.
    pub theta: Option<f64>,
    /// Number of spectral pairs used by this loop's preconditioner or deflation.
    pub k_used: usize,
    pub trace: SolveTrace,
    /// `Q(L U x_ℓ)` at every recorded iterate.
    pub quadratic_costs: Vec<f64>,
    /// Pairs selected from this loop's run, used by the next loop.
    pub ritz: RitzPairs,
}

#[derive(Clone, Debug)]
pub struct GnRun {
    pub method: MethodSpec,
    pub loops: Vec<LoopResult>,
    pub final_v: Vector,
}

/// Truncated Gauss-Newton with `cfg.outer_loops` loops of `cfg.inner_iters`
/// CG iterations each.
///
/// Loop 1 is plain CG on `A⁽¹⁾` for every method. Later loops follow
/// `method`: plain CG, CG on the split system `UᵀA⁽ʲ⁾U` with a new level
/// built from the previous loop's Ritz pairs, or deflated CG with those
/// vectors. Products with every `A⁽ʲ⁾` are recorded per iteration.
pub fn run_gauss_newton(prob: &DAProblem, method: MethodSpec, cfg: &GaussNewtonConfig) -> Result<GnRun> {
    if cfg.outer_loops == 0 || cfg.inner_iters == 0 {
        return Err(Error::Config("outer_loops and inner_iters must be at least 1".into()));
    }
    let prob = Arc::new(prob.clone());
    let n = prob.dim();
    let mut state = GNState::initial(&prob)?;
    let mut ledger = MatvecLedger::new();
    let mut levels = ComposedPreconditioner::default();
    let mut prev: Option<(LinearOperator, RitzPairs)> = None;
    let mut loops = Vec::with_capacity(cfg.outer_loops);

    for j in 1..=cfg.outer_loops {
        let (a, b) = assemble_system(&prob, &state)?;
        ledger.watch(a.counter());
        let mut kcfg = KrylovConfig::new(cfg.inner_iters)
            .record_iterates(true)
            .record_lanczos(true)
            .reorthogonalize(cfg.reorthogonalize);
        kcfg.watch = ledger.clone();
        let zero = Vector::zeros(n);

        let mut theta = None;
        let mut k_used = 0;
        let (trace, op) = match (&prev, method) {
            (None, _) | (Some(_), MethodSpec::BPrec) => (cg(&a, &b, &zero, &kcfg)?, a.clone()),
            (Some((_, pairs)), MethodSpec::DefCg) => {
                k_used = pairs.len();
                (deflated_cg(&a, &pairs.vectors, &b, &zero, &kcfg)?, a.clone())
            }
            (Some((prev_op, pairs)), m) => {
                let strategy = m.theta_strategy().expect("spectral method");
                let basis = SpectralBasis::from_ritz(pairs)?;
                k_used = basis.k();
                let rhs_prev = levels.apply_ut(&b);
                let t = resolve_theta(strategy, &basis, Some(prev_op), Some(&rhs_prev), Some(cfg.lambda_n_hint))?;
                theta = Some(t);
                let p = ScaledSpectralPreconditioner::new(basis, t)?;
                let y0 = if m == MethodSpec::InitSlmpBase { init_slmp_guess(&p, &rhs_prev)? } else { zero.clone() };
                levels.push(p)?;
                let split = split_operator(&a, &levels, format!("U{j}"))?;
                (cg(&split, &levels.apply_ut(&b), &y0, &kcfg)?, split)
            }
        };
        let spectral = theta.is_some();
        let to_x = |y: &Vector| if spectral { levels.apply_u(y) } else { y.clone() };

        let iterates = trace.iterates.as_ref().expect("iterates recorded");
        let quadratic_costs =
            iterates.iter().map(|y| state.quadratic_cost(&prob, &to_x(y))).collect::<Result<Vec<_>>>()?;
        let ritz =
            extract_ritz_pairs(trace.lanczos.as_ref().expect("lanczos recorded"), &op, cfg.ritz_eps, cfg.ritz_max)?;
        let x = to_x(&trace.solution);
        let mut trace = trace;
        if let Some(ld) = trace.lanczos.as_mut() {
            ld.residual_basis.clear();
        }
        state = state.advance(&prob, &x)?;
        prev = Some((op, ritz.clone()));
        loops.push(LoopResult { outer_loop: j, theta, k_used, trace, quadratic_costs, ritz });
    }
    Ok(GnRun { method, loops, final_v: state.v })
}

pub const RESULT_CSV_HEADER: &str =
    "method,outer_loop,inner_iter,quadratic_cost,residual_norm,matvec_A1,matvec_A2,theta_used";

/// One inner iteration of one outer loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: String,
    pub outer_loop: usize,
    pub inner_iter: usize,
    pub quadratic_cost: f64,
    pub residual_norm: f64,
    pub matvec_a1: usize,
    pub matvec_a2: usize,
    pub theta_used: Option<f64>,
}

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.method,
            self.outer_loop,
            self.inner_iter,
            fmt_f64(self.quadratic_cost),
            fmt_f64(self.residual_norm),
            self.matvec_a1,
            self.matvec_a2,
            self.theta_used.map(fmt_f64).unwrap_or_default()
        )
    }
}

impl GnRun {
    pub fn rows(&self) -> Vec<ResultRow> {
        let mut rows = Vec::new();
        for lp in &self.loops {
            for (ell, q) in lp.quadratic_costs.iter().enumerate() {
                let counts = &lp.trace.matvec_counts[ell];
                rows.push(ResultRow {
                    method: self.method.label().to_string(),
                    outer_loop: lp.outer_loop,
                    inner_iter: ell,
                    quadratic_cost: *q,
                    residual_norm: lp.trace.residual_norms[ell],
                    matvec_a1: counts.get("A1").copied().unwrap_or(0),
                    matvec_a2: counts.get("A2").copied().unwrap_or(0),
                    theta_used: lp.theta,
                });
            }
        }
        rows
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(RESULT_CSV_HEADER);
        s.push('\n');
        for r in self.rows() {
            s.push_str(&r.to_csv_line());
            s.push('\n');
        }
        s
    }

    pub fn loop_result(&self, outer_loop: usize) -> Option<&LoopResult> {
        self.loops.iter().find(|l| l.outer_loop == outer_loop)
    }
}
