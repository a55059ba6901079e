//! Parametric autocovariance models and covariance matrix assembly.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::design::Design;
use crate::error::{Error, Result};

/// Diagonal jitter tried in order when a Cholesky factorization fails.
const JITTER_LADDER: [f64; 3] = [0.0, 1e-12, 1e-10];

/// Autocovariance `R(s, t)` of a centered error process on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum CovModel {
    /// `R ≡ 0`; a noise-free process for oracle tests.
    Zero,
    /// `σ² min(s, t)`.
    Wiener { sigma2: f64 },
    /// `σ² exp(-λ |s - t|)`.
    #[serde(rename = "ou")]
    OrnsteinUhlenbeck { sigma2: f64, lambda: f64 },
    /// `σ² ρ^(|s^λ - t^λ| / λ)`.
    #[serde(rename = "gen-ou")]
    GeneralizedOu { sigma2: f64, lambda: f64, rho: f64 },
    /// `s t min(s, t)`.
    ScaledWiener,
}

impl CovModel {
    /// Checks the parameter ranges of the family.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(
                    name,
                    format!("must be a positive finite number, got {v}"),
                ))
            }
        };
        match *self {
            CovModel::Zero | CovModel::ScaledWiener => Ok(()),
            CovModel::Wiener { sigma2 } => positive("sigma2", sigma2),
            CovModel::OrnsteinUhlenbeck { sigma2, lambda } => {
                positive("sigma2", sigma2)?;
                positive("lambda", lambda)
            }
            CovModel::GeneralizedOu { sigma2, lambda, rho } => {
                positive("sigma2", sigma2)?;
                positive("lambda", lambda)?;
                if rho > 0.0 && rho < 1.0 {
                    Ok(())
                } else {
                    Err(Error::param("rho", format!("must lie in (0, 1), got {rho}")))
                }
            }
        }
    }

    /// Short family name as used in configuration files.
    pub fn family_name(&self) -> &'static str {
        match self {
            CovModel::Zero => "zero",
            CovModel::Wiener { .. } => "wiener",
            CovModel::OrnsteinUhlenbeck { .. } => "ou",
            CovModel::GeneralizedOu { .. } => "gen-ou",
            CovModel::ScaledWiener => "scaled-wiener",
        }
    }

    /// Parameters as `name=value` pairs joined by `;`.
    pub fn params(&self) -> String {
        match *self {
            CovModel::Zero | CovModel::ScaledWiener => String::new(),
            CovModel::Wiener { sigma2 } => format!("sigma2={sigma2}"),
            CovModel::OrnsteinUhlenbeck { sigma2, lambda } => {
                format!("sigma2={sigma2};lambda={lambda}")
            }
            CovModel::GeneralizedOu { sigma2, lambda, rho } => {
                format!("sigma2={sigma2};lambda={lambda};rho={rho}")
            }
        }
    }

    /// `R(s, t)`.
    #[inline]
    pub fn eval(&self, s: f64, t: f64) -> f64 {
        match *self {
            CovModel::Zero => 0.0,
            CovModel::Wiener { sigma2 } => sigma2 * s.min(t),
            CovModel::OrnsteinUhlenbeck { sigma2, lambda } => sigma2 * (-lambda * (s - t).abs()).exp(),
            CovModel::GeneralizedOu { sigma2, lambda, rho } => {
                sigma2 * (rho.ln() * (s.powf(lambda) - t.powf(lambda)).abs() / lambda).exp()
            }
            CovModel::ScaledWiener => s * t * s.min(t),
        }
    }

    /// The jump function `α(t)` in closed form, if the family has one.
    ///
    /// The zero process has `α ≡ 0`, which is not a valid jump function.
    pub fn jump_profile(&self) -> Result<JumpProfile> {
        match *self {
            CovModel::Zero => Err(Error::Domain(
                "the zero covariance has no jump along the diagonal".into(),
            )),
            CovModel::Wiener { sigma2 } => Ok(JumpProfile::Power {
                scale: sigma2,
                exponent: 0.0,
            }),
            CovModel::OrnsteinUhlenbeck { sigma2, lambda } => Ok(JumpProfile::Power {
                scale: 2.0 * sigma2 * lambda,
                exponent: 0.0,
            }),
            CovModel::GeneralizedOu { sigma2, lambda, rho } => Ok(JumpProfile::Power {
                scale: -2.0 * sigma2 * rho.ln(),
                exponent: lambda - 1.0,
            }),
            CovModel::ScaledWiener => Ok(JumpProfile::Power {
                scale: 1.0,
                exponent: 2.0,
            }),
        }
    }
}

impl fmt::Display for CovModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CovModel::Zero => write!(f, "zero"),
            CovModel::Wiener { sigma2 } => write!(f, "wiener(sigma2={sigma2})"),
            CovModel::OrnsteinUhlenbeck { sigma2, lambda } => {
                write!(f, "ou(sigma2={sigma2};lambda={lambda})")
            }
            CovModel::GeneralizedOu { sigma2, lambda, rho } => {
                write!(f, "gen-ou(sigma2={sigma2};lambda={lambda};rho={rho})")
            }
            CovModel::ScaledWiener => write!(f, "scaled-wiener"),
        }
    }
}

/// Parses the `Display` form: a family name, optionally followed by
/// `(name=value;...)`, e.g. `gen-ou(sigma2=0.5;lambda=4;rho=0.5)`. The
/// result is validated.
impl FromStr for CovModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (family, body) = match s.find('(') {
            Some(i) => {
                let Some(body) = s[i + 1..].strip_suffix(')') else {
                    return Err(Error::Parse(format!("unbalanced parentheses in `{s}`")));
                };
                (s[..i].trim(), body)
            }
            None => (s, ""),
        };
        let mut params: Vec<(&str, f64)> = Vec::new();
        for part in body.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let Some((k, v)) = part.split_once('=') else {
                return Err(Error::Parse(format!("expected `name=value`, got `{part}`")));
            };
            let k = k.trim();
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("invalid value for `{k}`: `{}`", v.trim())))?;
            if params.iter().any(|(name, _)| *name == k) {
                return Err(Error::Parse(format!("parameter `{k}` given twice")));
            }
            params.push((k, v));
        }
        let expected: &[&str] = match family.to_ascii_lowercase().as_str() {
            "zero" => &[],
            "wiener" => &["sigma2"],
            "ou" => &["sigma2", "lambda"],
            "gen-ou" => &["sigma2", "lambda", "rho"],
            "scaled-wiener" => &[],
            other => {
                return Err(Error::Parse(format!(
                    "unknown covariance family `{other}` (expected zero, wiener, ou, gen-ou or scaled-wiener)"
                )))
            }
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !expected.contains(k)) {
            return Err(Error::Parse(format!("`{family}` takes no parameter `{k}`")));
        }
        let get = |name: &str| {
            params
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::Parse(format!("`{family}` needs `{name}`")))
        };
        let model = match expected.len() {
            0 if family.eq_ignore_ascii_case("zero") => CovModel::Zero,
            0 => CovModel::ScaledWiener,
            1 => CovModel::Wiener {
                sigma2: get("sigma2")?,
            },
            2 => CovModel::OrnsteinUhlenbeck {
                sigma2: get("sigma2")?,
                lambda: get("lambda")?,
            },
            _ => CovModel::GeneralizedOu {
                sigma2: get("sigma2")?,
                lambda: get("lambda")?,
                rho: get("rho")?,
            },
        };
        model.validate()?;
        Ok(model)
    }
}

/// A jump function `α(t)` on `(0, 1]`.
#[derive(Clone)]
pub enum JumpProfile {
    /// `scale · t^exponent`; constant when the exponent is zero.
    Power {
        scale: f64,
        exponent: f64,
    },
    General(std::sync::Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl JumpProfile {
    pub fn constant(c: f64) -> Self {
        JumpProfile::Power {
            scale: c,
            exponent: 0.0,
        }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            JumpProfile::Power { scale, exponent } => {
                if *exponent == 0.0 {
                    *scale
                } else {
                    scale * t.powf(*exponent)
                }
            }
            JumpProfile::General(f) => f(t),
        }
    }
}

impl fmt::Debug for JumpProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JumpProfile::Power { scale, exponent } => f
                .debug_struct("Power")
                .field("scale", scale)
                .field("exponent", exponent)
                .finish(),
            JumpProfile::General(_) => f.write_str("General(..)"),
        }
    }
}

/// `R(s, t)`.
pub fn cov_eval(m: &CovModel, s: f64, t: f64) -> f64 {
    m.eval(s, t)
}

/// `α(t) = R^(0,1)(t, t⁻) - R^(0,1)(t, t⁺)` for `t ∈ (0, 1]`.
pub fn jump_alpha(m: &CovModel, t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::param(
            "t",
            format!("jump function is defined on (0, 1], got {t}"),
        ));
    }
    Ok(m.jump_profile()?.eval(t))
}

/// Symmetric covariance matrix `Σ_ij = R(t_i, t_j)` over a design.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    matrix: DMatrix<f64>,
}

impl CovMatrix {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::param("matrix", "covariance matrix must be square"));
        }
        Ok(CovMatrix { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `wᵀ Σ w`, touching only the index range `[lo, hi)` where `w` may be
    /// nonzero.
    pub fn quadratic_form(&self, w: &[f64], lo: usize, hi: usize) -> f64 {
        let mut acc = 0.0;
        for i in lo..hi {
            if w[i] == 0.0 {
                continue;
            }
            let row: f64 = (lo..hi)
                .zip(&w[lo..hi])
                .map(|(j, wj)| self.matrix[(i, j)] * wj)
                .sum();
            acc += w[i] * row;
        }
        acc
    }

    /// Lower Cholesky factor, escalating diagonal jitter `0 → 1e-12 → 1e-10`.
    ///
    /// An identically zero matrix factors to the zero matrix.
    pub fn cholesky_lower(&self) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if self.matrix.iter().all(|v| *v == 0.0) {
            return Ok(DMatrix::zeros(n, n));
        }
        for jitter in JITTER_LADDER {
            let mut a = self.matrix.clone();
            for i in 0..n {
                a[(i, i)] += jitter;
            }
            if let Some(ch) = a.cholesky() {
                return Ok(ch.unpack());
            }
        }
        Err(Error::Numerical(format!(
            "covariance matrix of size {n} is not positive definite even with diagonal jitter 1e-10"
        )))
    }
}

/// Assembles `R(t_i, t_j)` over the design points and checks it factors.
pub fn cov_matrix(m: &CovModel, d: &Design) -> Result<CovMatrix> {
    let matrix = raw_cov_matrix(m, d.points());
    let cov = CovMatrix { matrix };
    cov.cholesky_lower()?;
    Ok(cov)
}

/// Assembles `R(t_i, t_j)` without the factorization check.
pub fn raw_cov_matrix(m: &CovModel, points: &[f64]) -> DMatrix<f64> {
    let n = points.len();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = m.eval(points[i], points[j]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}
