//! Smoothing kernels on `[-1, 1]` and their moment constants.
//!
//! Every kernel here is an even polynomial in `u` restricted to `[-1, 1]`,
//! stored as coefficients of powers of `u²`. That covers the quadratic
//! (biweight) and triweight kernels as well as user supplied ones, and makes
//! evenness hold by construction.
//!
//! Three constants drive the asymptotic risk expressions:
//!
//! * `B = ∫ t² K(t) dt`
//! * `V = ∫ K(t)² dt`
//! * `C_K = ∫∫ |u - v| K(u) K(v) du dv`
//!
//! They are computed in closed form from the coefficients when the kernel is
//! built and cached. [`kernel_constants`] recomputes them by quadrature so the
//! two routes can be checked against each other.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::simpson;

const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    Quadratic,
    Triweight,
    /// `K(u) = Σ c_k u^(2k)` on `[-1, 1]`.
    UserTabulated {
        coefficients: Vec<f64>,
    },
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quadratic" | "biweight" => Ok(KernelFamily::Quadratic),
            "triweight" => Ok(KernelFamily::Triweight),
            other => Err(Error::Parse(format!(
                "unknown kernel `{other}` (expected `quadratic` or `triweight`)"
            ))),
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelFamily::Quadratic => f.write_str("quadratic"),
            KernelFamily::Triweight => f.write_str("triweight"),
            KernelFamily::UserTabulated { .. } => f.write_str("user"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConstants {
    /// Second moment `∫ t² K(t) dt`.
    pub b: f64,
    /// `∫ K(t)² dt`.
    pub v: f64,
    /// `∫∫ |u - v| K(u) K(v) du dv`.
    pub c_k: f64,
}

/// A compactly supported, even, normalized smoothing kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    family: KernelFamily,
    /// Coefficients of `u^(2k)`.
    coeffs: Vec<f64>,
    constants: KernelConstants,
}

impl Kernel {
    /// `K(u) = 15/16 (1 - u²)²`.
    pub fn quadratic() -> Self {
        let c = 15.0 / 16.0;
        Self::from_parts(KernelFamily::Quadratic, vec![c, -2.0 * c, c])
    }

    /// `K(u) = 35/32 (1 - u²)³`.
    pub fn triweight() -> Self {
        let c = 35.0 / 32.0;
        Self::from_parts(KernelFamily::Triweight, vec![c, -3.0 * c, 3.0 * c, -c])
    }

    /// A kernel given by its coefficients in `u²`.
    ///
    /// Rejects coefficient lists whose polynomial does not integrate to one
    /// over `[-1, 1]` or goes negative there.
    pub fn user_tabulated(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::param(
                "coefficients",
                "must be a nonempty list of finite numbers",
            ));
        }
        let family = KernelFamily::UserTabulated {
            coefficients: coefficients.clone(),
        };
        let kernel = Self::from_parts(family, coefficients);
        let mass = simpson(|u| kernel.eval(u), -1.0, 1.0, 2048);
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::param(
                "coefficients",
                format!("kernel integrates to {mass}, expected 1"),
            ));
        }
        if (0..=1000).any(|i| kernel.eval(i as f64 / 1000.0) < 0.0) {
            return Err(Error::param("coefficients", "kernel takes negative values"));
        }
        Ok(kernel)
    }

    pub fn from_family(family: &KernelFamily) -> Result<Self> {
        match family {
            KernelFamily::Quadratic => Ok(Self::quadratic()),
            KernelFamily::Triweight => Ok(Self::triweight()),
            KernelFamily::UserTabulated { coefficients } => Self::user_tabulated(coefficients.clone()),
        }
    }

    fn from_parts(family: KernelFamily, coeffs: Vec<f64>) -> Self {
        let constants = analytic_constants(&coeffs);
        Kernel {
            family,
            coeffs,
            constants,
        }
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    /// Closed-form constants, cached at construction.
    pub fn constants(&self) -> KernelConstants {
        self.constants
    }

    /// `K(u)`; exactly zero for `|u| > 1`.
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        if !(-1.0..=1.0).contains(&u) {
            return 0.0;
        }
        let u2 = u * u;
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * u2 + c)
    }

    /// `∫_{-1}^{u} K`, with `u` clamped to `[-1, 1]`.
    #[inline]
    pub fn cdf(&self, u: f64) -> f64 {
        let u = u.clamp(-1.0, 1.0);
        0.5 + self.odd_antiderivative(u)
    }

    /// `Σ c_k u^(2k+1) / (2k+1)`, the antiderivative of `K` vanishing at zero.
    fn odd_antiderivative(&self, u: f64) -> f64 {
        let u2 = u * u;
        let mut acc = 0.0;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            acc = acc * u2 + c / (2 * k + 1) as f64;
        }
        acc * u
    }
}

/// Closed-form constants from the coefficients in `u²`.
///
/// `C_K` uses `E|U - V| = 2 ∫ F (1 - F)` for independent `U, V ~ K`; with
/// `F = 1/2 + G` and `G` odd this is `1 - 2 ∫ G²`.
fn analytic_constants(coeffs: &[f64]) -> KernelConstants {
    // ∫_{-1}^{1} u^(2p) du = 2 / (2p + 1)
    let even_moment = |p: usize| 2.0 / (2 * p + 1) as f64;
    let b = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c * even_moment(k + 1))
        .sum();
    let mut v = 0.0;
    let mut g2 = 0.0;
    for (j, cj) in coeffs.iter().enumerate() {
        let aj = cj / (2 * j + 1) as f64;
        for (k, ck) in coeffs.iter().enumerate() {
            let ak = ck / (2 * k + 1) as f64;
            v += cj * ck * even_moment(j + k);
            g2 += aj * ak * even_moment(j + k + 1);
        }
    }
    KernelConstants {
        b,
        v,
        c_k: 1.0 - 2.0 * g2,
    }
}

/// `K(u)`.
pub fn eval_kernel(k: &Kernel, u: f64) -> f64 {
    k.eval(u)
}

/// Composite Simpson on `n`, `2n` and `4n` panels, Richardson-extrapolated
/// twice so the leading `h⁴` and `h⁶` error terms cancel.
fn simpson_extrapolated<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let s1 = simpson(&f, a, b, n);
    let s2 = simpson(&f, a, b, 2 * n);
    let s4 = simpson(&f, a, b, 4 * n);
    let r1 = (16.0 * s2 - s1) / 15.0;
    let r2 = (16.0 * s4 - s2) / 15.0;
    (64.0 * r2 - r1) / 63.0
}

/// Kernel constants by composite Simpson quadrature with `quad_points` panels,
/// extrapolated to remove the leading error terms.
///
/// `C_K` is evaluated as an iterated integral whose inner integral is split
/// at the diagonal `u = v`, so each piece is a smooth polynomial integrand.
pub fn kernel_constants(k: &Kernel, quad_points: usize) -> Result<KernelConstants> {
    if quad_points < 64 {
        return Err(Error::param("quad_points", format!("{quad_points} < 64")));
    }
    let b = simpson_extrapolated(|t| t * t * k.eval(t), -1.0, 1.0, quad_points);
    let v = simpson_extrapolated(
        |t| {
            let y = k.eval(t);
            y * y
        },
        -1.0,
        1.0,
        quad_points,
    );
    let inner = |v: f64| {
        let left = simpson_extrapolated(|u| (v - u) * k.eval(u), -1.0, v, quad_points);
        let right = simpson_extrapolated(|u| (u - v) * k.eval(u), v, 1.0, quad_points);
        left + right
    };
    let c_k = simpson_extrapolated(|v| k.eval(v) * inner(v), -1.0, 1.0, quad_points);
    Ok(KernelConstants { b, v, c_k })
}

/// `φ_{x,h}(t) = K((x - t) / h) / h`.
#[inline]
pub fn phi(x: f64, h: f64, t: f64, k: &Kernel) -> f64 {
    k.eval((x - t) / h) / h
}

/// `∫_a^b K(u) du` with limits clamped to `[-1, 1]`.
pub fn kernel_cdf_integral(k: &Kernel, a: f64, b: f64) -> f64 {
    debug_assert!(a <= b, "kernel_cdf_integral: a = {a} > b = {b}");
    let a = a.clamp(-1.0, 1.0);
    let b = b.clamp(-1.0, 1.0);
    k.odd_antiderivative(b) - k.odd_antiderivative(a)
}
