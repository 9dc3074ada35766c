mod common;

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use spectral_lmp::cli::{cmd_da_run, ExitStatus};
use spectral_lmp::da::{
    assemble_system, run_gauss_newton, synthesize_truth_and_obs, DAConfig, GNState, GaussNewtonConfig, GnRun,
    Lorenz96Model, MethodSpec,
};
use spectral_lmp::krylov::{cg, chebyshev_bound, energy_error_oracle, extract_ritz_pairs, KrylovConfig};
use spectral_lmp::linops::{gen, symmetric_eig_sorted, Vector};
use spectral_lmp::slmp::{deflation_initial_guess, midrange_ratio, resolve_theta, ThetaStrategy};

use common::{dominated, errors, tracked, uniform, Case, EXACT_FLOOR, RESOLVED};

type Check = Result<String, String>;

/// Energy-error history of one run, its exact-arithmetic counterpart and the
/// condition number of the operator it effectively iterated on.
struct ChebRecord {
    errors: Vec<f64>,
    exact: Vec<f64>,
    kappa: f64,
}

#[derive(Default)]
struct Runs(Vec<ChebRecord>);

impl Runs {
    fn push(&mut self, errors: &[f64], exact: &[f64], kappa: f64) {
        self.0.push(ChebRecord { errors: errors.to_vec(), exact: exact.to_vec(), kappa });
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// An exact-arithmetic inequality `a_ℓ ≤ (1 + slack)·b_ℓ`, checked on the
/// exact energy errors at every iteration and on the computed runs over the
/// iterations where both still follow exact arithmetic.
struct Inequality<'a> {
    a_run: &'a [f64],
    a_exact: &'a [f64],
    b_run: &'a [f64],
    b_exact: &'a [f64],
    horizon: usize,
}

/// Iterations compared on runs versus on exact values.
#[derive(Default)]
struct Coverage {
    runs: usize,
    exact: usize,
}

impl Coverage {
    fn check(&mut self, q: Inequality, e0: f64, slack: f64) -> Result<(), String> {
        dominated(q.a_exact, q.b_exact, EXACT_FLOOR * e0, slack).map_err(|e| format!("exact: {e}"))?;
        let h = q.horizon.min(q.a_run.len()).min(q.b_run.len());
        dominated(&q.a_run[..h], &q.b_run[..h], RESOLVED * e0, slack).map_err(|e| format!("runs: {e}"))?;
        self.runs += h;
        self.exact += q.a_exact.len().min(q.b_exact.len());
        Ok(())
    }

    fn summary(&self) -> String {
        format!("runs compared on {}/{} iterations", self.runs, self.exact)
    }
}

fn dominance(runs: &mut Runs) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut cover = Coverage::default();
    for case_no in 0..50 {
        let n = rng.random_range(10..=100);
        let c = Case::random(&mut rng, n, 1.0, 1e3).reorthogonalized();
        let k = rng.random_range(1..n);
        let theta = uniform(&mut rng, c.lambda(k), c.lambda(k - 1));
        let tc = c.cg(n);
        let tp = c.pcg(k, theta, n);
        let (ec, ep) = (errors(&tc), errors(&tp));
        let (xc, xp) = (c.exact_cg(n), c.exact_pcg(k, theta, n));
        let horizon = tracked(ec, &xc).min(tracked(ep, &xp));
        cover
            .check(Inequality { a_run: ep, a_exact: &xp, b_run: ec, b_exact: &xc, horizon }, xc[0], 1e-8)
            .map_err(|e| format!("case {case_no} (n={n}, k={k}): {e}"))?;
        runs.push(ec, &xc, c.inst.eig.condition_number());
        runs.push(ep, &xp, theta.max(c.lambda(k)) / c.lambda(n - 1));
    }
    Ok(format!("50 instances, {}", cover.summary()))
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let s_lo = f(lo).signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid).signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn adversarial_boundary() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let n = rng.random_range(6..=40);
        let inst = gen::random_spd_instance(n, 1.0, 100.0, &mut rng);
        let k = rng.random_range(1..n - 1);
        let (lk, lk1) = (inst.eig.values[k - 1], inst.eig.values[k]);
        let mut eta = Vector::zeros(n);
        eta[k - 1] = lk.sqrt();
        eta[k] = lk1.sqrt();
        let r0 = &inst.eig.vectors * eta;
        let c = Case::new(inst, r0, Vector::zeros(n));
        let cg1 = errors(&c.cg(1))[1];
        let gap = |theta: f64| {
            let e = errors(&c.pcg(k, theta, 1))[1];
            e * e - cg1 * cg1
        };
        let lower = bisect(lk1 * lk1 / lk / 4.0, lk1, gap);
        let upper = bisect(lk1, 4.0 * lk, gap);
        let (want_lo, want_hi) = (lk1 * lk1 / lk, lk);
        worst = worst.max((lower - want_lo).abs() / want_lo).max((upper - want_hi).abs() / want_hi);
        ensure(gap(0.5 * (want_lo + want_hi)) < 0.0, || "PCG not better inside the interval".into())?;
    }
    ensure(worst <= 1e-6, || format!("boundary off by {worst:e}"))?;
    Ok(format!("max relative boundary error {worst:.1e}"))
}

fn theta_r_optimal(runs: &mut Runs) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst_gap = f64::NEG_INFINITY;
    for case_no in 0..100 {
        let n = rng.random_range(5..=60);
        let c = Case::random(&mut rng, n, 1.0, 1e3);
        let k = rng.random_range(1..n);
        let basis = c.basis(k);
        let theta_r =
            resolve_theta(ThetaStrategy::ThetaR, &basis, Some(&c.a), Some(&c.r0()), None).map_err(|e| e.to_string())?;
        let (ln, lk1) = (c.lambda(n - 1), c.lambda(k));
        // forward error of the subtraction formula: both differences cancel
        // down to `‖r₀ − S_kS_kᵀr₀‖²` out of terms of size up to `λ₁‖r₀‖²`
        let r0 = c.r0();
        let rest = (&r0 - basis.vectors() * basis.coefficients(&r0).unwrap()).norm_squared();
        let tol = 4.0 * n as f64 * f64::EPSILON * c.lambda(0) * r0.norm_squared() / rest;
        ensure(ln - tol <= theta_r && theta_r <= lk1 + tol, || {
            format!("case {case_no}: θ_r={theta_r:e} outside [{ln:e}, {lk1:e}] (rounding {tol:.1e})")
        })?;
        let tr = c.pcg(k, theta_r, 1);
        let e0 = errors(&tr)[0];
        let phi_r = errors(&tr)[1] / e0;
        runs.push(errors(&tr), &c.exact_pcg(k, theta_r, 1), theta_r.max(lk1) / theta_r.min(ln));
        if case_no < 20 {
            let (lo, hi) = ((ln / 10.0).ln(), (10.0 * c.lambda(0)).ln());
            for i in 0..1000 {
                let theta = (lo + (hi - lo) * i as f64 / 999.0).exp();
                let phi = errors(&c.pcg(k, theta, 1))[1] / e0;
                worst_gap = worst_gap.max(phi_r - phi);
                ensure(phi_r <= phi + 1e-10, || format!("case {case_no}: Φ(θ_r)={phi_r:e} > Φ({theta:e})={phi:e}"))?;
            }
        }
    }
    Ok(format!("bracket on 100 instances, grid on 20, max Φ(θ_r)−Φ(θ) = {worst_gap:.1e}"))
}

fn residual_elimination() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(5..=100);
        let c = Case::random(&mut rng, n, 1.0, 1e3);
        let k = rng.random_range(1..n);
        let basis = c.basis(k);
        let r0 = c.r0();
        let theta =
            resolve_theta(ThetaStrategy::ThetaR, &basis, Some(&c.a), Some(&r0), None).map_err(|e| e.to_string())?;
        let x1 = c.pcg(k, theta, 1).solution;
        let r1 = &c.b - c.inst.matrix.matrix() * x1;
        worst = worst.max(basis.coefficients(&r1).unwrap().norm() / r0.norm());
    }
    ensure(worst <= 1e-8, || format!("‖S_kᵀr₁‖/‖r₀‖ = {worst:e}"))?;
    Ok(format!("max ‖S_kᵀr₁‖/‖r₀‖ = {worst:.1e}"))
}

fn deflation_sandwich(runs: &mut Runs) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut cover = Coverage::default();
    for case_no in 0..50 {
        let n = rng.random_range(10..=100);
        let c = Case::random(&mut rng, n, 1.0, 1e3).reorthogonalized();
        let k = rng.random_range(1..n - 1);
        let (lk, lk1, ln) = (c.lambda(k - 1), c.lambda(k), c.lambda(n - 1));
        let basis = c.basis(k);
        let theta_m =
            resolve_theta(ThetaStrategy::MidRange, &basis, None, None, Some(ln)).map_err(|e| e.to_string())?;
        let ratio_m = midrange_ratio(theta_m, lk1, ln);
        let want = (lk - ln) / (lk + ln);
        ensure((ratio_m - want).abs() <= 4.0 * f64::EPSILON * want, || {
            format!("case {case_no}: α(θ_m)/θ_m = {ratio_m:e}, expected {want:e}")
        })?;
        let td = c.deflated(k, n);
        let ed = errors(&td);
        let xd = c.exact_deflated(k, n);
        runs.push(ed, &xd, lk1 / ln);
        for theta in [theta_m, lk] {
            let tp = c.pcg(k, theta, n);
            let ep = errors(&tp);
            let xp = c.exact_pcg(k, theta, n);
            runs.push(ep, &xp, theta.max(lk1) / ln);
            let horizon = tracked(ed, &xd).min(tracked(ep, &xp));
            let ratio = midrange_ratio(theta, lk1, ln);
            cover
                .check(
                    Inequality {
                        a_run: &ed[1..],
                        a_exact: &xd[1..],
                        b_run: &ep[1..],
                        b_exact: &xp[1..],
                        horizon: horizon.saturating_sub(1),
                    },
                    xd[0],
                    1e-8,
                )
                .map_err(|e| format!("case {case_no}, θ={theta:e}, lower: {e}"))?;
            let scaled = |e: &[f64]| e.iter().map(|v| ratio * v).collect::<Vec<f64>>();
            let (ud, uxd) = (scaled(ed), scaled(&xd));
            cover
                .check(
                    Inequality {
                        a_run: &ep[1..],
                        a_exact: &xp[1..],
                        b_run: &ud,
                        b_exact: &uxd,
                        horizon: horizon.saturating_sub(1),
                    },
                    xd[0],
                    1e-8,
                )
                .map_err(|e| format!("case {case_no}, θ={theta:e}, upper: {e}"))?;
        }
    }
    Ok(format!("50 instances, θ ∈ {{θ_m, λ_k}}, {}", cover.summary()))
}

fn monotone_in_k(runs: &mut Runs) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut cover = Coverage::default();
    for case_no in 0..50 {
        let n = rng.random_range(10..=100);
        let c = Case::random(&mut rng, n, 1.0, 1e3).reorthogonalized();
        let k1 = rng.random_range(2..n - 1);
        let k2 = rng.random_range(k1 + 1..n);
        let t1 = uniform(&mut rng, c.lambda(k1), c.lambda(k1 - 1));
        let t2 = uniform(&mut rng, c.lambda(k2), c.lambda(k2 - 1));
        let (e1, e2) = (c.pcg(k1, t1, n), c.pcg(k2, t2, n));
        let (e1, e2) = (errors(&e1), errors(&e2));
        let (x1, x2) = (c.exact_pcg(k1, t1, n), c.exact_pcg(k2, t2, n));
        runs.push(e1, &x1, t1.max(c.lambda(k1)) / c.lambda(n - 1));
        runs.push(e2, &x2, t2.max(c.lambda(k2)) / c.lambda(n - 1));
        let horizon = tracked(e1, &x1).min(tracked(e2, &x2));
        cover
            .check(Inequality { a_run: e2, a_exact: &x2, b_run: e1, b_exact: &x1, horizon }, x1[0], 1e-8)
            .map_err(|e| format!("case {case_no} (k₁={k1}, k₂={k2}): {e}"))?;
    }
    Ok(format!("50 nested pairs, {}", cover.summary()))
}

fn deflated_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst_x = 0.0f64;
    let mut worst_o = 0.0f64;
    for _ in 0..10 {
        let n = rng.random_range(20..=100);
        let c = Case::random(&mut rng, n, 1.0, 20.0);
        let k = rng.random_range(1..n / 2);
        let iters = 10;
        let td = c.deflated(k, iters);
        let x0_def = deflation_initial_guess(&c.basis(k), &c.a, &c.b, &c.x0).map_err(|e| e.to_string())?;
        let tc = c.cg_from(&x0_def, iters);
        for (xd, xc) in td.iterates.as_ref().unwrap().iter().zip(tc.iterates.as_ref().unwrap()) {
            worst_x = worst_x.max((xd - xc).norm() / xc.norm());
        }
        let diag = td.deflation.as_ref().unwrap();
        let scale = c.lambda(0) * c.r0().norm();
        for (wr, wap) in diag.wt_r.iter().zip(&diag.wt_ap) {
            worst_o = worst_o.max(wr / c.r0().norm()).max(wap / scale);
        }
    }
    ensure(worst_x <= 1e-8, || format!("iterate gap {worst_x:e}"))?;
    ensure(worst_o <= 1e-8, || format!("orthogonality {worst_o:e}"))?;
    Ok(format!("iterate gap {worst_x:.1e}, orthogonality {worst_o:.1e}"))
}

fn oracle_equivalence(runs: &mut Runs) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.random_range(4..=50);
        let c = Case::random(&mut rng, n, 1.0, 10.0).reorthogonalized();
        let k = rng.random_range(1..n);
        let theta = uniform(&mut rng, c.lambda(n - 1), c.lambda(0));
        let r0 = c.r0();
        for (kk, trace) in [(0, c.cg(n)), (k, c.pcg(k, theta, n))] {
            let e = errors(&trace);
            let exact = c.exact_pcg(kk, theta, n);
            let kappa = if kk == 0 { c.inst.eig.condition_number() } else { c.lambda(0) / c.lambda(n - 1) };
            runs.push(e, &exact, kappa);
            for (l, &got) in e.iter().enumerate() {
                let want = energy_error_oracle(&c.inst.eig, &r0, kk, theta, l).map_err(|e| e.to_string())?;
                worst = worst.max((got - want).abs() / e[0]);
            }
        }
    }
    ensure(worst <= 1e-7, || format!("max |err − oracle|/‖e₀‖_A = {worst:e}"))?;
    Ok(format!("max |err − oracle|/‖e₀‖_A = {worst:.1e}"))
}

fn chebyshev(runs: &Runs) -> Check {
    let mut checked = 0;
    for (i, r) in runs.0.iter().enumerate() {
        for (what, errs, floor) in [("run", &r.errors, RESOLVED), ("exact", &r.exact, EXACT_FLOOR)] {
            let e0 = errs[0];
            for (l, &e) in errs.iter().enumerate() {
                if e < floor * e0 {
                    continue;
                }
                let bound = chebyshev_bound(r.kappa, l).map_err(|e| e.to_string())? * e0;
                ensure(e <= bound * (1.0 + 1e-8), || {
                    format!("{what} {i}, iteration {l}: {e:e} > bound {bound:e} (κ={:e})", r.kappa)
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{} runs, {checked} iterates", runs.0.len()))
}

fn tlm_adjoint() -> Check {
    let model = Lorenz96Model::new(40, 8.0, 0.025, 2).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut w0 = Vector::from_element(40, 8.0) + gen::random_vector(40, &mut rng) * 0.01;
    w0 = model.advance(&w0, 1000);
    let traj = model.trajectory(&w0, 3).map_err(|e| e.to_string())?;
    let s = gen::random_vector(40, &mut rng);
    let ys: Vec<Vector> = (0..3).map(|_| gen::random_vector(40, &mut rng)).collect();
    let ms = model.tlm(&traj, &s).map_err(|e| e.to_string())?;
    let mty = model.adjoint(&traj, &ys).map_err(|e| e.to_string())?;
    let lhs: f64 = ms.iter().zip(&ys).map(|(a, b)| a.dot(b)).sum();
    let rhs = s.dot(&mty);
    let dot_rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs());
    ensure(dot_rel <= 1e-10, || format!("dot-product test {dot_rel:e}"))?;

    let eps = 1e-5;
    let plus = model.trajectory(&(&w0 + &s * eps), 3).map_err(|e| e.to_string())?;
    let minus = model.trajectory(&(&w0 - &s * eps), 3).map_err(|e| e.to_string())?;
    let mut fd_rel = 0.0f64;
    for (i, m) in ms.iter().enumerate() {
        let fd = (&plus.window_states()[i] - &minus.window_states()[i]) / (2.0 * eps);
        fd_rel = fd_rel.max((fd - m).norm() / m.norm());
    }
    ensure(fd_rel <= 1e-5, || format!("finite-difference check {fd_rel:e}"))?;
    Ok(format!("dot product {dot_rel:.1e}, finite difference {fd_rel:.1e}"))
}

fn first_level_spectrum() -> Check {
    let mut msg = Vec::new();
    for (m_per_window, n_windows) in [(10, 1), (5, 2)] {
        let cfg = DAConfig { n: 40, m_per_window, n_windows, spinup_steps: 500, ..DAConfig::low_obs() };
        let prob = std::sync::Arc::new(synthesize_truth_and_obs(&cfg).map_err(|e| e.to_string())?);
        let state = GNState::initial(&prob).map_err(|e| e.to_string())?;
        let (a, _) = assemble_system(&prob, &state).map_err(|e| e.to_string())?;
        let dense = a.to_dense();
        let sym = (&dense + dense.transpose()) * 0.5;
        let (vals, _) = symmetric_eig_sorted(&sym);
        let unit = vals.iter().filter(|v| (*v - 1.0).abs() <= 1e-8).count();
        let m = m_per_window * n_windows;
        ensure(unit == 40 - m, || format!("{unit} unit eigenvalues with m={m}, expected {}", 40 - m))?;
        ensure(vals[39] >= 1.0 - 1e-8, || format!("smallest eigenvalue {:e} below 1", vals[39]))?;
        msg.push(format!("m={m}: {unit} unit eigenvalues"));
    }
    Ok(msg.join(", "))
}

fn loop2_cost(run: &GnRun, iter: usize) -> f64 {
    run.loops[1].quadratic_costs[iter]
}

fn selected_pairs(cfg: &DAConfig, gn: &GaussNewtonConfig) -> Result<usize, String> {
    let prob = std::sync::Arc::new(synthesize_truth_and_obs(cfg).map_err(|e| e.to_string())?);
    let state = GNState::initial(&prob).map_err(|e| e.to_string())?;
    let (a, b) = assemble_system(&prob, &state).map_err(|e| e.to_string())?;
    let kcfg = KrylovConfig::new(gn.inner_iters).record_lanczos(true).reorthogonalize(gn.reorthogonalize);
    let t = cg(&a, &b, &Vector::zeros(cfg.n), &kcfg).map_err(|e| e.to_string())?;
    let pairs =
        extract_ritz_pairs(t.lanczos.as_ref().unwrap(), &a, gn.ritz_eps, gn.ritz_max).map_err(|e| e.to_string())?;
    Ok(pairs.len())
}

fn full_scale_ordering() -> Check {
    let gn = GaussNewtonConfig::default();
    let high = selected_pairs(&DAConfig::high_obs(), &gn)?;
    let prob = synthesize_truth_and_obs(&DAConfig::low_obs()).map_err(|e| e.to_string())?;
    let methods =
        [MethodSpec::DefCg, MethodSpec::SlmpThetaM, MethodSpec::SlmpLambdaK, MethodSpec::BPrec, MethodSpec::SlmpThetaR];
    let runs: Vec<GnRun> = methods
        .par_iter()
        .map(|&m| run_gauss_newton(&prob, m, &gn))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let low = runs[0].loops[0].ritz.len();
    ensure((30..=60).contains(&low), || format!("LowObs selected {low} pairs"))?;
    ensure((15..=40).contains(&high), || format!("HighObs selected {high} pairs"))?;
    for it in [5, 10, 20] {
        let q: Vec<f64> = runs[..4].iter().map(|r| loop2_cost(r, it)).collect();
        for w in 0..3 {
            ensure(q[w] <= 1.05 * q[w + 1], || {
                format!(
                    "iteration {it}: Q({}) = {} > 1.05·Q({}) = {}",
                    methods[w].label(),
                    q[w],
                    methods[w + 1].label(),
                    q[w + 1]
                )
            })?;
        }
    }
    let a1 = |r: &GnRun| r.rows().last().unwrap().matvec_a1;
    let (a1_r, a1_m) = (a1(&runs[4]), a1(&runs[1]));
    ensure(a1_r == a1_m + 1, || format!("A1 products θ_r {a1_r}, θ_m {a1_m}"))?;
    Ok(format!("LowObs k={low}, HighObs k={high}, A1 θ_r={a1_r} θ_m={a1_m}"))
}

fn csv_files(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let p = entry.map_err(|e| e.to_string())?.path();
        if p.extension().is_some_and(|x| x == "csv") {
            out.push((p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).map_err(|e| e.to_string())?));
        }
    }
    out.sort();
    Ok(out)
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = tmp.path().join("da.cfg");
    fs::write(&cfg, "[problem]\nscenario = low_obs\n\n[run]\nmethods = all\n").map_err(|e| e.to_string())?;
    let (d1, d2) = (tmp.path().join("run1"), tmp.path().join("run2"));
    for d in [&d1, &d2] {
        let status = cmd_da_run(&cfg, Some(d)).map_err(|e| e.to_string())?;
        ensure(status == ExitStatus::Success, || format!("da-run exited with {status:?}"))?;
    }
    let (a, b) = (csv_files(&d1)?, csv_files(&d2)?);
    ensure(a.len() == MethodSpec::ALL.len(), || format!("{} CSV files", a.len()))?;
    ensure(a == b, || "CSV files differ between runs".into())?;
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d1.join("summary.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let k = summary["selected_pairs"].as_u64().unwrap_or(0);
    ensure((30..=60).contains(&k), || format!("summary reports {k} selected pairs"))?;
    Ok(format!("{} identical CSVs, summary k={k}", a.len()))
}

fn report(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let outcome = f();
    let took = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(d) if took <= budget => (true, d),
        Ok(d) => (false, format!("{d}; took {took:.1?}, budget {budget:?}")),
        Err(e) => (false, e),
    };
    println!("criterion {id:>2} {} {name} ({:.2} s): {detail}", if ok { "PASS" } else { "FAIL" }, took.as_secs_f64());
    ok
}

fn main() {
    let s = Duration::from_secs;
    let mut runs = Runs::default();
    let mut ok = true;
    ok &= report(1, "PCG dominates CG", s(30), || dominance(&mut runs));
    ok &= report(2, "adversarial improvement interval", s(5), adversarial_boundary);
    ok &= report(3, "θ_r optimality and bracket", s(30), || theta_r_optimal(&mut runs));
    ok &= report(4, "residual elimination with θ_r", s(5), residual_elimination);
    ok &= report(5, "deflation sandwich", s(30), || deflation_sandwich(&mut runs));
    ok &= report(6, "monotonicity in k", s(30), || monotone_in_k(&mut runs));
    ok &= report(7, "deflated CG equivalence", s(10), deflated_equivalence);
    ok &= report(8, "energy-error oracle", s(30), || oracle_equivalence(&mut runs));
    ok &= report(9, "Chebyshev bound", s(10), || chebyshev(&runs));
    ok &= report(10, "TLM and adjoint", s(10), tlm_adjoint);
    ok &= report(11, "first-level spectrum", s(5), first_level_spectrum);
    ok &= report(12, "full-scale method ordering", s(600), full_scale_ordering);
    ok &= report(13, "determinism", s(600), determinism);
    if !ok {
        std::process::exit(1);
    }
}
