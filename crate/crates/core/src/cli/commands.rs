use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::config::{ConfigFile, ExperimentConfig};
use super::ExitStatus;
use crate::da::{assemble_system, run_gauss_newton, synthesize_truth_and_obs, GNState, GnRun, MethodSpec};
use crate::error::{Error, Result};
use crate::krylov::{
    cg, deflated_cg, extract_ritz_pairs, fmt_f64, pcg, ritz_values, KrylovConfig, SolveTrace, TerminationReason,
};
use crate::linops::{dense_eig, direct_solve, gen, read_dense, symmetric_eig_sorted, DenseSpdMatrix, Vector};
use crate::slmp::{
    resolve_theta, split_operator, ComposedPreconditioner, ScaledSpectralPreconditioner, SpectralBasis, ThetaStrategy,
};

/// Scalings reported by `spectrum` when none are configured.
pub const SPECTRUM_THETAS: [ThetaStrategy; 4] =
    [ThetaStrategy::One, ThetaStrategy::LambdaK, ThetaStrategy::ThetaR, ThetaStrategy::MidRange];

const DENSE_SPECTRUM_MAX: usize = 2000;

/// `--out`/environment override first, then the config, then `./out`.
pub fn output_dir(over: Option<&Path>, from_config: Option<&str>, config_path: &Path) -> PathBuf {
    match (over, from_config) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(d)) => base_dir(config_path).join(d),
        (None, None) => PathBuf::from("out"),
    }
}

fn base_dir(config_path: &Path) -> PathBuf {
    config_path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn read_config(path: &Path) -> Result<(String, ConfigFile)> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg = ConfigFile::parse(&text)?;
    Ok((text, cfg))
}

fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn reproducibility(text: &str, seed: Option<u64>) -> Value {
    json!({
        "config_sha256": sha256_hex(text),
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| Error::Config(format!("bad {what} entry `{t}`"))))
        .collect()
}

/// `identity:N`, `diag:a,b,…`, `random:n,lo,hi,seed`, `file:PATH` or a bare path.
fn load_matrix(spec: &str, base: &Path) -> Result<DMatrix<f64>> {
    let (kind, arg) = spec.split_once(':').unwrap_or(("file", spec));
    match kind.trim() {
        "identity" => {
            let n: usize = arg.trim().parse().map_err(|_| Error::Config(format!("bad identity size `{arg}`")))?;
            Ok(DMatrix::identity(n, n))
        }
        "diag" => {
            let d: Vec<f64> = parse_list(arg, "diag")?;
            Ok(DMatrix::from_diagonal(&Vector::from_vec(d)))
        }
        "random" => {
            let p: Vec<f64> = parse_list(arg, "random")?;
            if p.len() != 4 || p[0] < 1.0 {
                return Err(Error::Config("random expects n,lo,hi,seed".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(p[3] as u64);
            Ok(gen::random_spd(p[0] as usize, p[1], p[2], &mut rng).into_inner())
        }
        "file" => read_dense(&base.join(arg.trim())).map_err(|e| match e {
            Error::Io(io) => Error::Config(format!("cannot read matrix {arg}: {io}")),
            other => other,
        }),
        other => Err(Error::Config(format!("unknown matrix source `{other}`"))),
    }
}

/// `ones`, `zeros`, `random:seed` or `file:PATH` (one number per line).
fn load_vector(spec: &str, n: usize, base: &Path) -> Result<Vector> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let v = match kind.trim() {
        "ones" => Vector::from_element(n, 1.0),
        "zeros" => Vector::zeros(n),
        "random" => {
            let seed: u64 = arg.trim().parse().map_err(|_| Error::Config(format!("bad seed `{arg}`")))?;
            gen::random_vector(n, &mut ChaCha8Rng::seed_from_u64(seed))
        }
        "file" => {
            let text = fs::read_to_string(base.join(arg.trim()))
                .map_err(|e| Error::Config(format!("cannot read vector {arg}: {e}")))?;
            Vector::from_vec(parse_list(&text.split_whitespace().collect::<Vec<_>>().join(","), "vector")?)
        }
        other => return Err(Error::Config(format!("unknown vector source `{other}`"))),
    };
    if v.len() != n {
        return Err(Error::Config(format!("vector has {} entries, matrix is {n}×{n}", v.len())));
    }
    Ok(v)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

const SOLVE_KEYS: &[&str] =
    &["matrix", "rhs", "x0", "solver", "max_iters", "rtol", "k", "theta", "lambda_n_hint", "reorthogonalize"];

/// Single solve from a `[solve]` section; writes `trace.csv` and `trace.json`.
pub fn cmd_solve(config_path: &Path, out: Option<&Path>) -> Result<ExitStatus> {
    let (text, cfg) = read_config(config_path)?;
    cfg.check_keys(&[("solve", SOLVE_KEYS), ("run", &["output_dir"])])?;
    let base = base_dir(config_path);
    let spec = cfg.raw("solve", "matrix").ok_or_else(|| Error::Config("[solve] matrix is required".into()))?;
    let m = load_matrix(spec, &base)?;
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Config(format!("matrix must be square and nonempty, got {}×{}", m.nrows(), m.ncols())));
    }
    let n = m.nrows();
    let b = load_vector(cfg.raw("solve", "rhs").unwrap_or("ones"), n, &base)?;
    let x0 = load_vector(cfg.raw("solve", "x0").unwrap_or("zeros"), n, &base)?;
    let solver = cfg.raw("solve", "solver").unwrap_or("cg").to_ascii_lowercase();
    let max_iters: usize = cfg.get("solve", "max_iters")?.unwrap_or(n);
    let rtol: f64 = cfg.get("solve", "rtol")?.unwrap_or(0.0);
    let k: usize = cfg.get("solve", "k")?.unwrap_or(0);
    let reorth: bool = cfg.get("solve", "reorthogonalize")?.unwrap_or(false);

    let spd = DenseSpdMatrix::new(m.clone()).ok();
    let a = crate::linops::LinearOperator::from_dense("A1", m);
    let mut kcfg = KrylovConfig::new(max_iters).rtol(rtol).reorthogonalize(reorth);
    if let Some(s) = &spd {
        kcfg = kcfg.exact_solution(direct_solve(s, &b)?);
    }
    let basis = || -> Result<SpectralBasis> {
        let s = spd.as_ref().ok_or_else(|| Error::NotSpd("the spectral basis needs an SPD matrix".into()))?;
        SpectralBasis::from_eig(&dense_eig(s)?, k)
    };

    let mut theta_used = None;
    let trace: SolveTrace = match solver.as_str() {
        "cg" => cg(&a, &b, &x0, &kcfg)?,
        "pcg" => {
            let basis = basis()?;
            let strategy: ThetaStrategy = cfg.get("solve", "theta")?.unwrap_or(ThetaStrategy::One);
            let theta = if basis.k() == 0 {
                1.0
            } else {
                let r0 = &b - a.apply_uncounted(&x0);
                let hint = cfg.get("solve", "lambda_n_hint")?.unwrap_or(1.0);
                resolve_theta(strategy, &basis, Some(&a), Some(&r0), Some(hint))?
            };
            theta_used = Some(theta);
            let p = ScaledSpectralPreconditioner::new(basis, theta)?;
            eprintln!("theta_strategy={strategy} theta={}", fmt_f64(theta));
            pcg(&a, &p, &b, &x0, &kcfg)?
        }
        "deflated_cg" | "defcg" => deflated_cg(&a, basis()?.vectors(), &b, &x0, &kcfg)?,
        other => return Err(Error::Config(format!("unknown solver `{other}`"))),
    };

    let dir = output_dir(out, cfg.raw("run", "output_dir"), config_path);
    write_file(&dir, "trace.csv", &trace.to_csv())?;
    let mut doc: Value = serde_json::from_str(&trace.to_json()?)?;
    doc["theta"] = json!(theta_used);
    doc["reproducibility"] = reproducibility(&text, None);
    write_file(&dir, "trace.json", &serde_json::to_string_pretty(&doc)?)?;

    println!(
        "{} terminated at iteration {} ({}), residual {}",
        trace.solver,
        trace.terminated_at,
        trace.termination_reason.as_str(),
        fmt_f64(trace.residual_norms[trace.terminated_at])
    );
    Ok(if trace.termination_reason == TerminationReason::Breakdown {
        eprintln!("breakdown: non-positive curvature at iteration {}", trace.terminated_at);
        ExitStatus::Breakdown
    } else {
        ExitStatus::Success
    })
}

fn method_summary(method: MethodSpec, run: &std::result::Result<GnRun, Error>) -> Value {
    match run {
        Err(e) => json!({ "method": method.label(), "status": "failed", "error": e.to_string() }),
        Ok(r) => {
            let rows = r.rows();
            let last = rows.last();
            let loops: Vec<Value> = r
                .loops
                .iter()
                .map(|l| {
                    json!({
                        "outer_loop": l.outer_loop,
                        "theta": l.theta,
                        "pairs_used": l.k_used,
                        "pairs_selected": l.ritz.len(),
                        "iterations": l.trace.terminated_at,
                        "termination": l.trace.termination_reason.as_str(),
                        "final_quadratic_cost": l.quadratic_costs.last(),
                    })
                })
                .collect();
            json!({
                "method": method.label(),
                "status": "ok",
                "theta_used": r.loops.iter().find_map(|l| l.theta),
                "matvec_A1": last.map(|x| x.matvec_a1),
                "matvec_A2": last.map(|x| x.matvec_a2),
                "loops": loops,
            })
        }
    }
}

/// Runs every configured method on the same problem; writes one CSV per
/// method and `summary.json`.
pub fn cmd_da_run(config_path: &Path, out: Option<&Path>) -> Result<ExitStatus> {
    let (text, cfg) = read_config(config_path)?;
    let exp = ExperimentConfig::from_file(&cfg, &[])?;
    let dir = output_dir(out, exp.output_dir.as_deref(), config_path);
    let prob = synthesize_truth_and_obs(&exp.problem)?;

    let runs: Vec<(MethodSpec, std::result::Result<GnRun, Error>)> =
        exp.methods.par_iter().map(|&m| (m, run_gauss_newton(&prob, m, &exp.gauss_newton))).collect();

    fs::create_dir_all(&dir)?;
    let mut failed = false;
    for (m, r) in &runs {
        match r {
            Ok(run) => write_file(&dir, &format!("{}.csv", m.label()), &run.to_csv())?,
            Err(e) => {
                failed = true;
                eprintln!("method {} failed: {e}", m.label());
            }
        }
    }
    let selected = runs.iter().find_map(|(_, r)| r.as_ref().ok().map(|r| r.loops[0].ritz.len()));
    let summary = json!({
        "scenario": format!("{:?}", exp.scenario),
        "n": exp.problem.n,
        "m_per_window": exp.problem.m_per_window,
        "n_windows": exp.problem.n_windows,
        "outer_loops": exp.gauss_newton.outer_loops,
        "inner_iters": exp.gauss_newton.inner_iters,
        "eps_ritz": exp.gauss_newton.ritz_eps,
        "selected_pairs": selected,
        "methods": runs.iter().map(|(m, r)| method_summary(*m, r)).collect::<Vec<_>>(),
        "reproducibility": reproducibility(&text, Some(exp.problem.seed)),
    });
    write_file(&dir, "summary.json", &serde_json::to_string_pretty(&summary)?)?;
    for (m, r) in &runs {
        if let Ok(r) = r {
            let last = r.rows().last().cloned();
            if let Some(row) = last {
                println!(
                    "{:<16} Q={} A1={} A2={}",
                    m.label(),
                    fmt_f64(row.quadratic_cost),
                    row.matvec_a1,
                    row.matvec_a2
                );
            }
        }
    }
    Ok(if failed { ExitStatus::MethodFailure } else { ExitStatus::Success })
}

/// Eigenvalues (or Ritz estimates) of `U_θ A⁽²⁾ U_θ` for each scaling, one
/// column per scaling, written to `spectrum.csv` with `spectrum.json`.
pub fn cmd_spectrum(config_path: &Path, out: Option<&Path>) -> Result<ExitStatus> {
    let (text, cfg) = read_config(config_path)?;
    let exp = ExperimentConfig::from_file(&cfg, &[("spectrum", &["thetas", "mode"])])?;
    let thetas: Vec<ThetaStrategy> = match cfg.raw("spectrum", "thetas") {
        Some(s) => parse_list(s, "theta")?,
        None => SPECTRUM_THETAS.to_vec(),
    };
    let dense = match cfg.raw("spectrum", "mode").unwrap_or("dense") {
        "dense" => true,
        "ritz" => false,
        other => return Err(Error::Config(format!("unknown spectrum mode `{other}`"))),
    };
    let n = exp.problem.n;
    if dense && n > DENSE_SPECTRUM_MAX {
        return Err(Error::Config(format!("dense spectrum limited to n ≤ {DENSE_SPECTRUM_MAX}; use mode = ritz")));
    }
    let gn = &exp.gauss_newton;
    let prob = std::sync::Arc::new(synthesize_truth_and_obs(&exp.problem)?);

    let state1 = GNState::initial(&prob)?;
    let (a1, b1) = assemble_system(&prob, &state1)?;
    let kcfg = KrylovConfig::new(gn.inner_iters).record_lanczos(true).reorthogonalize(gn.reorthogonalize);
    let t1 = cg(&a1, &b1, &Vector::zeros(n), &kcfg)?;
    let pairs = extract_ritz_pairs(t1.lanczos.as_ref().expect("recorded"), &a1, gn.ritz_eps, gn.ritz_max)?;
    let basis = SpectralBasis::from_ritz(&pairs)?;
    let state2 = state1.advance(&prob, &t1.solution)?;
    let (a2, b2) = assemble_system(&prob, &state2)?;
    let a2_dense = if dense { Some(a2.to_dense()) } else { None };

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut resolved = Vec::new();
    for &strategy in &thetas {
        let theta = if basis.k() == 0 {
            1.0
        } else {
            resolve_theta(strategy, &basis, Some(&a1), Some(&b2), Some(gn.lambda_n_hint))?
        };
        resolved.push(json!({ "strategy": strategy.to_string(), "theta": theta }));
        let p = ScaledSpectralPreconditioner::new(basis.clone(), theta)?;
        let col = if let Some(ad) = &a2_dense {
            let mut m = ad.clone();
            for mut c in m.column_iter_mut() {
                let v = p.apply_u(&c.clone_owned());
                c.copy_from(&v);
            }
            let mut m = m.transpose();
            for mut c in m.column_iter_mut() {
                let v = p.apply_u(&c.clone_owned());
                c.copy_from(&v);
            }
            let m = (&m + m.transpose()) * 0.5;
            symmetric_eig_sorted(&m).0.iter().copied().collect()
        } else {
            let mut levels = ComposedPreconditioner::default();
            levels.push(p)?;
            let split = split_operator(&a2, &levels, "U2")?;
            let kc = KrylovConfig::new(gn.inner_iters).record_lanczos(true).reorthogonalize(gn.reorthogonalize);
            let t = cg(&split, &levels.apply_ut(&b2), &Vector::zeros(n), &kc)?;
            ritz_values(t.lanczos.as_ref().expect("recorded"))?
        };
        columns.push(col);
    }

    let dir = output_dir(out, exp.output_dir.as_deref(), config_path);
    let mut csv = String::from("index");
    for s in &thetas {
        csv.push(',');
        csv.push_str(s.as_str());
    }
    csv.push('\n');
    let rows = columns.iter().map(Vec::len).max().unwrap_or(0);
    for i in 0..rows {
        csv.push_str(&i.to_string());
        for c in &columns {
            csv.push(',');
            if let Some(v) = c.get(i) {
                csv.push_str(&fmt_f64(*v));
            }
        }
        csv.push('\n');
    }
    write_file(&dir, "spectrum.csv", &csv)?;
    let doc = json!({
        "mode": if dense { "dense" } else { "ritz" },
        "pairs_selected": basis.k(),
        "lambda_k": basis.lambda_k(),
        "thetas": resolved,
        "reproducibility": reproducibility(&text, Some(exp.problem.seed)),
    });
    write_file(&dir, "spectrum.json", &serde_json::to_string_pretty(&doc)?)?;
    println!("k={} thetas={}", basis.k(), resolved.len());
    Ok(ExitStatus::Success)
}
