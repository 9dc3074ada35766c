//! Flat `key = value` configuration with `[section]` headers. Comments
//! take a whole line.
//!
//! ```text
//! # comment
//! [problem]
//! scenario = LowObs
//! seed = 7
//! ```

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::da::{DAConfig, GaussNewtonConfig, MethodSpec};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let ini = ini::Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        for (name, props) in ini.iter() {
            if name.is_none() && props.is_empty() {
                continue;
            }
            let sec = sections.entry(name.unwrap_or("").trim().to_ascii_lowercase()).or_default();
            for (k, v) in props.iter() {
                let key = k.trim().to_ascii_lowercase();
                if key.is_empty() {
                    return Err(Error::Config("empty key".into()));
                }
                if sec.insert(key.clone(), v.trim().to_string()).is_some() {
                    return Err(Error::Config(format!("duplicate key `{key}`")));
                }
            }
        }
        Ok(Self { sections })
    }

    pub fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(section, key)
            .map(|v| v.parse::<T>().map_err(|e| Error::Config(format!("[{section}] {key} = `{v}`: {e}"))))
            .transpose()
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    /// Rejects sections and keys outside `allowed`, to catch typos.
    pub fn check_keys(&self, allowed: &[(&str, &[&str])]) -> Result<()> {
        for (sec, keys) in &self.sections {
            let spec = allowed
                .iter()
                .find(|(s, _)| s == sec)
                .ok_or_else(|| Error::Config(format!("unknown section [{sec}]")))?;
            if let Some(k) = keys.keys().find(|k| !spec.1.contains(&k.as_str())) {
                return Err(Error::Config(format!("unknown key `{k}` in [{sec}]")));
            }
        }
        Ok(())
    }
}

macro_rules! set_from {
    ($cfg:expr, $sec:expr, $target:expr, $($field:ident),+) => {
        $( if let Some(v) = $cfg.get($sec, stringify!($field))? { $target.$field = v; } )+
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    LowObs,
    HighObs,
    Custom,
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lowobs" | "low_obs" => Ok(Self::LowObs),
            "highobs" | "high_obs" => Ok(Self::HighObs),
            "custom" => Ok(Self::Custom),
            _ => Err(Error::Config(format!("unknown scenario `{s}`"))),
        }
    }
}

/// Settings for `da-run` and `spectrum`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub problem: DAConfig,
    pub gauss_newton: GaussNewtonConfig,
    pub methods: Vec<MethodSpec>,
    pub output_dir: Option<String>,
}

pub(crate) const PROBLEM_KEYS: &[&str] = &[
    "scenario",
    "n",
    "m_per_window",
    "n_windows",
    "sigma_b",
    "sigma_r",
    "length_scale",
    "diffusion_steps",
    "forcing",
    "dt",
    "steps_per_window",
    "spinup_steps",
    "seed",
];
pub(crate) const GN_KEYS: &[&str] =
    &["outer_loops", "inner_iters", "eps_ritz", "ritz_max", "lambda_n_hint", "reorthogonalize"];

pub fn parse_methods(s: &str) -> Result<Vec<MethodSpec>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(MethodSpec::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let m: MethodSpec = part.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(Error::Config("no methods listed".into()));
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn from_file(cfg: &ConfigFile, extra: &[(&str, &[&str])]) -> Result<Self> {
        let mut allowed: Vec<(&str, &[&str])> =
            vec![("problem", PROBLEM_KEYS), ("gauss_newton", GN_KEYS), ("run", &["methods", "output_dir"])];
        allowed.extend_from_slice(extra);
        cfg.check_keys(&allowed)?;

        let scenario = cfg.get::<Scenario>("problem", "scenario")?.unwrap_or(Scenario::LowObs);
        let mut problem = match scenario {
            Scenario::HighObs => DAConfig::high_obs(),
            Scenario::LowObs | Scenario::Custom => DAConfig::low_obs(),
        };
        set_from!(
            cfg,
            "problem",
            problem,
            n,
            m_per_window,
            n_windows,
            sigma_b,
            sigma_r,
            length_scale,
            diffusion_steps,
            forcing,
            dt,
            steps_per_window,
            spinup_steps,
            seed
        );
        problem.validate()?;

        let mut gauss_newton = GaussNewtonConfig::default();
        set_from!(
            cfg,
            "gauss_newton",
            gauss_newton,
            outer_loops,
            inner_iters,
            ritz_max,
            lambda_n_hint,
            reorthogonalize
        );
        if let Some(e) = cfg.get("gauss_newton", "eps_ritz")? {
            gauss_newton.ritz_eps = e;
        }
        if gauss_newton.outer_loops == 0 || gauss_newton.inner_iters == 0 {
            return Err(Error::Config("outer_loops and inner_iters must be at least 1".into()));
        }

        let methods = match cfg.raw("run", "methods") {
            Some(s) => parse_methods(s).map_err(|e| Error::Config(e.to_string()))?,
            None => MethodSpec::ALL.to_vec(),
        };
        let output_dir = cfg.raw("run", "output_dir").map(str::to_string);
        Ok(Self { scenario, problem, gauss_newton, methods, output_dir })
    }
}
