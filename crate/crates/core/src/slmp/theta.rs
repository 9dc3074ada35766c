use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linops::{LinearOperator, Vector};

use super::SpectralBasis;

/// How the scaling `θ` of the preconditioner is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaStrategy {
    Fixed(f64),
    /// `θ = 1`, the unscaled spectral preconditioner.
    One,
    /// `θ = λ_k`, the smallest stored value.
    LambdaK,
    /// The minimizer of the first-iteration energy error, from `A` and `r₀`.
    ThetaR,
    /// `θ = (λ_k + λ_n)/2` with `λ_n` supplied as a hint.
    MidRange,
}

impl ThetaStrategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Fixed(_) => "fixed",
            Self::One => "one",
            Self::LambdaK => "lambda_k",
            Self::ThetaR => "theta_r",
            Self::MidRange => "mid_range",
        }
    }
}

impl fmt::Display for ThetaStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fixed(v) => write!(f, "fixed({v})"),
            other => f.write_str(other.as_str()),
        }
    }
}

impl FromStr for ThetaStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Ok(match s.to_ascii_lowercase().as_str() {
            "one" | "1" => Self::One,
            "lambda_k" | "lambdak" => Self::LambdaK,
            "theta_r" | "thetar" => Self::ThetaR,
            "mid_range" | "midrange" | "theta_m" | "thetam" => Self::MidRange,
            other => {
                let inner = other.strip_prefix("fixed(").and_then(|r| r.strip_suffix(')')).unwrap_or(other);
                let v: f64 = inner.parse().map_err(|_| Error::Config(format!("unknown theta strategy `{s}`")))?;
                Self::Fixed(v)
            }
        })
    }
}

/// Resolves `θ` for `basis`.
///
/// `ThetaR` takes one product with `a_prev` to evaluate
///
/// ```text
/// θ_r = (r₀ᵀAr₀ − Σ λ_i η_i²) / (r₀ᵀr₀ − Σ η_i²),   η = S_kᵀr₀
/// ```
///
/// and fails with [`Error::DegenerateResidual`] when `r₀` lies (almost) in
/// `span(S_k)`.
pub fn resolve_theta(
    strategy: ThetaStrategy,
    basis: &SpectralBasis,
    a_prev: Option<&LinearOperator>,
    r0: Option<&Vector>,
    lambda_n_hint: Option<f64>,
) -> Result<f64> {
    let lambda_k = || basis.lambda_k().ok_or_else(|| Error::Basis(format!("{strategy} needs a nonempty basis")));
    let theta = match strategy {
        ThetaStrategy::Fixed(v) => v,
        ThetaStrategy::One => 1.0,
        ThetaStrategy::LambdaK => lambda_k()?,
        ThetaStrategy::MidRange => {
            let hint = lambda_n_hint.ok_or_else(|| Error::Argument("mid_range needs a lambda_n hint".into()))?;
            if !(hint > 0.0) {
                return Err(Error::Argument(format!("lambda_n hint must be positive, got {hint}")));
            }
            (lambda_k()? + hint) / 2.0
        }
        ThetaStrategy::ThetaR => {
            let a = a_prev.ok_or_else(|| Error::Argument("theta_r needs the previous operator".into()))?;
            let r = r0.ok_or_else(|| Error::Argument("theta_r needs a residual".into()))?;
            check_dim(basis.dim(), a.dim())?;
            check_dim(a.dim(), r.len())?;
            let eta = basis.coefficients(r)?;
            let rr = r.dot(r);
            let den = rr - eta.norm_squared();
            if den <= 1e-14 * rr {
                return Err(Error::DegenerateResidual { remaining: den.max(0.0) });
            }
            let lam_eta: f64 = basis.values().iter().zip(eta.iter()).map(|(l, e)| l * e * e).sum();
            let num = r.dot(&a.apply(r)) - lam_eta;
            num / den
        }
    };
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Argument(format!("{strategy} resolved to a non-positive theta {theta:e}")));
    }
    Ok(theta)
}

/// The interval `(λ_{k+1}²/λ_k, λ_k)` of scalings for which the first
/// iterate is guaranteed to improve on plain CG in the adversarial case
/// `η_i² = λ_i`.
pub fn improvement_interval(lambda_k: f64, lambda_k1: f64) -> Result<(f64, f64)> {
    if !(lambda_k >= lambda_k1 && lambda_k1 > 0.0) {
        return Err(Error::Argument(format!("need lambda_k ≥ lambda_k1 > 0, got {lambda_k}, {lambda_k1}")));
    }
    Ok((lambda_k1 * lambda_k1 / lambda_k, lambda_k))
}

/// `max(|λ_{k+1} − θ|, |θ − λ_n|)/θ`, the contraction factor relating the
/// preconditioned and deflated iterations.
pub fn midrange_ratio(theta: f64, lambda_k1: f64, lambda_n: f64) -> f64 {
    (lambda_k1 - theta).abs().max((theta - lambda_n).abs()) / theta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{dense_eig, DenseSpdMatrix};

    fn diag_basis(vals: &[f64], k: usize) -> (LinearOperator, SpectralBasis) {
        let m = DenseSpdMatrix::from_diagonal(vals).unwrap();
        let basis = SpectralBasis::from_eig(&dense_eig(&m).unwrap(), k).unwrap();
        (m.to_operator("A1"), basis)
    }

    #[test]
    fn simple_strategies() {
        let (a, basis) = diag_basis(&[10.0, 4.0, 2.0], 2);
        assert_eq!(resolve_theta(ThetaStrategy::One, &basis, None, None, None).unwrap(), 1.0);
        assert_eq!(resolve_theta(ThetaStrategy::LambdaK, &basis, None, None, None).unwrap(), 4.0);
        assert_eq!(resolve_theta(ThetaStrategy::MidRange, &basis, None, None, Some(1.0)).unwrap(), 2.5);
        assert_eq!(resolve_theta(ThetaStrategy::Fixed(0.3), &basis, None, None, None).unwrap(), 0.3);
        assert!(resolve_theta(ThetaStrategy::Fixed(-1.0), &basis, None, None, None).is_err());
        assert!(resolve_theta(ThetaStrategy::MidRange, &basis, None, None, None).is_err());
        assert!(resolve_theta(ThetaStrategy::LambdaK, &SpectralBasis::empty(3), None, None, None).is_err());
        assert_eq!(a.matvec_count(), 0);
    }

    #[test]
    fn theta_r_example() {
        let (a, basis) = diag_basis(&[10.0, 4.0, 2.0], 1);
        let r0 = Vector::from_vec(vec![0.0, 1.0, 1.0]);
        let t = resolve_theta(ThetaStrategy::ThetaR, &basis, Some(&a), Some(&r0), None).unwrap();
        assert!((t - 3.0).abs() < 1e-14);
        assert_eq!(a.matvec_count(), 1);
        // the stored component does not move θ_r
        let r0 = Vector::from_vec(vec![5.0, 1.0, 1.0]);
        let t = resolve_theta(ThetaStrategy::ThetaR, &basis, Some(&a), Some(&r0), None).unwrap();
        assert!((t - 3.0).abs() < 1e-13);
    }

    #[test]
    fn theta_r_with_flat_tail() {
        let (a, basis) = diag_basis(&[9.0, 7.0, 2.0, 2.0, 2.0], 2);
        let r0 = Vector::from_vec(vec![1.0, -3.0, 0.5, 2.0, -1.0]);
        let t = resolve_theta(ThetaStrategy::ThetaR, &basis, Some(&a), Some(&r0), None).unwrap();
        assert!((t - 2.0).abs() < 1e-13);
    }

    #[test]
    fn theta_r_degenerate() {
        let (a, basis) = diag_basis(&[10.0, 4.0, 2.0], 1);
        let r0 = Vector::from_vec(vec![1.0, 0.0, 0.0]);
        let e = resolve_theta(ThetaStrategy::ThetaR, &basis, Some(&a), Some(&r0), None);
        assert!(matches!(e, Err(Error::DegenerateResidual { .. })));
    }

    #[test]
    fn parse_and_display() {
        for s in ["one", "lambda_k", "theta_r", "mid_range"] {
            let t: ThetaStrategy = s.parse().unwrap();
            assert_eq!(t.to_string(), s);
        }
        assert_eq!("fixed(2.5)".parse::<ThetaStrategy>().unwrap(), ThetaStrategy::Fixed(2.5));
        assert_eq!("0.5".parse::<ThetaStrategy>().unwrap(), ThetaStrategy::Fixed(0.5));
        assert!("bogus".parse::<ThetaStrategy>().is_err());
    }

    #[test]
    fn interval_and_ratio_examples() {
        assert_eq!(improvement_interval(4.0, 2.0).unwrap(), (1.0, 4.0));
        assert_eq!(improvement_interval(3.0, 3.0).unwrap(), (3.0, 3.0));
        assert!(improvement_interval(2.0, 4.0).is_err());
        let (lk1, ln) = (6.0, 2.0);
        assert!((midrange_ratio((lk1 + ln) / 2.0, lk1, ln) - 0.5).abs() < 1e-15);
        assert_eq!(midrange_ratio(3.0, 3.0, 3.0), 0.0);
        let lk = 8.0;
        assert!((midrange_ratio((lk + ln) / 2.0, lk, ln) - (lk - ln) / (lk + ln)).abs() < 1e-15);
    }
}
