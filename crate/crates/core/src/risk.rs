//! Exact and asymptotic risk of the kernel estimators.
//!
//! Exact risk is computed from the smoother weights: at each evaluation point
//! the bias is `Σ wᵢ g(tᵢ) - g(x)` and the variance `wᵀ Σ w / m`. Integrating
//! over a grid of evaluation points gives `Ibias²`, `Ivar` and the IMSE.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::covariance::{raw_cov_matrix, CovMatrix, CovModel, JumpProfile};
use crate::design::{DensitySpec, Design, WeightDensity};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, Smoother, WeightVector};
use crate::gp_sim::{derive_seed, ybar, RegressionFunction, Simulator};
use crate::kernels::Kernel;
use crate::quad::{normalized_trapezoid_weights, simpson, unit_integral};

/// Largest fraction of evaluation points that may be skipped for lack of data.
pub const MAX_SKIPPED_FRACTION: f64 = 0.05;

/// Evaluation points for the risk integrals: `k / (points + 1)` for
/// `k = 1..=points`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct XGrid {
    pub points: usize,
}

impl Default for XGrid {
    fn default() -> Self {
        XGrid { points: 201 }
    }
}

impl XGrid {
    pub fn nodes(&self) -> Vec<f64> {
        let d = (self.points + 1) as f64;
        (1..=self.points).map(|k| k as f64 / d).collect()
    }
}

/// What to do at an evaluation point where the estimator is undefined
/// (fewer than two design points in the window, or no mass to renormalize).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmptyWindowPolicy {
    /// Leave the point out of the integrals; more than 5% skipped is an error.
    #[default]
    Skip,
    /// Take the estimate there to be zero, the value of an empty sum.
    Zero,
}

/// Everything fixed while the bandwidth varies.
#[derive(Debug, Clone)]
pub struct RiskSetup {
    pub design: Design,
    pub smoother: Smoother,
    pub g: RegressionFunction,
    pub model: CovModel,
    pub m: usize,
    pub weight: WeightDensity,
    pub x_grid: XGrid,
    pub policy: EmptyWindowPolicy,
    cov: CovMatrix,
}

impl RiskSetup {
    pub fn new(
        design: Design,
        smoother: Smoother,
        g: RegressionFunction,
        model: CovModel,
        m: usize,
    ) -> Result<Self> {
        if m < 1 {
            return Err(Error::param("m", "need at least one replicate"));
        }
        model.validate()?;
        let cov = CovMatrix::from_matrix(raw_cov_matrix(&model, design.points()))?;
        Ok(RiskSetup {
            design,
            smoother,
            g,
            model,
            m,
            weight: WeightDensity::Uniform,
            x_grid: XGrid::default(),
            policy: EmptyWindowPolicy::default(),
            cov,
        })
    }

    pub fn with_weight(mut self, w: WeightDensity) -> Self {
        self.weight = w;
        self
    }

    pub fn with_x_grid(mut self, x_grid: XGrid) -> Self {
        self.x_grid = x_grid;
        self
    }

    pub fn with_policy(mut self, policy: EmptyWindowPolicy) -> Self {
        self.policy = policy;
        self
    }

    /// Same problem with a different replicate count.
    pub fn with_m(mut self, m: usize) -> Self {
        self.m = m.max(1);
        self
    }

    pub fn cov(&self) -> &CovMatrix {
        &self.cov
    }
}

/// `(bias, variance)` of the smoother at its evaluation point.
pub fn pointwise_risk(
    wv: &WeightVector,
    d: &Design,
    g: &RegressionFunction,
    cov: &CovMatrix,
    m: usize,
) -> (f64, f64) {
    let t = d.points();
    let fitted: f64 = wv.support.indices().map(|i| wv.weights[i] * g.eval(t[i])).sum();
    let bias = fitted - g.eval(wv.x);
    let var = cov.quadratic_form(&wv.weights, wv.support.start, wv.support.end) / m as f64;
    (bias, var)
}

/// Integrated risk of one estimator at one bandwidth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub estimator: EstimatorKind,
    pub model: CovModel,
    pub n: usize,
    pub m: usize,
    pub h: f64,
    pub ibias2: f64,
    pub ivar: f64,
    pub imse: f64,
    pub weight_density: String,
    pub x_grid: XGrid,
    /// Evaluation points where the estimator was undefined.
    pub skipped: usize,
}

/// `Ibias²`, `Ivar` and IMSE by trapezoid quadrature over the evaluation grid.
pub fn exact_imse(setup: &RiskSetup, h: f64) -> Result<RiskReport> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::param(
            "h",
            format!("bandwidth must lie in (0, 1), got {h}"),
        ));
    }
    let nodes = setup.x_grid.nodes();
    if nodes.is_empty() {
        return Err(Error::param("x_grid", "need at least one evaluation point"));
    }
    let quad = normalized_trapezoid_weights(&nodes);
    let point: Vec<Option<(f64, f64)>> = nodes
        .par_iter()
        .map(|&x| match setup.smoother.weights(&setup.design, x, h) {
            Ok(wv) => Ok(Some(pointwise_risk(
                &wv,
                &setup.design,
                &setup.g,
                &setup.cov,
                setup.m,
            ))),
            Err(Error::EmptyWindow { .. }) | Err(Error::ZeroMass { .. }) => match setup.policy {
                EmptyWindowPolicy::Skip => Ok(None),
                EmptyWindowPolicy::Zero => Ok(Some((-setup.g.eval(x), 0.0))),
            },
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;

    let skipped = point.iter().filter(|p| p.is_none()).count();
    if skipped as f64 > MAX_SKIPPED_FRACTION * nodes.len() as f64 {
        return Err(Error::TooManySkipped {
            skipped,
            total: nodes.len(),
        });
    }
    let mut mass = 0.0;
    let mut ibias2 = 0.0;
    let mut ivar = 0.0;
    for ((x, q), p) in nodes.iter().zip(&quad).zip(&point) {
        if let Some((b, v)) = p {
            let w = q * setup.weight.eval(*x);
            mass += q;
            ibias2 += w * b * b;
            ivar += w * v;
        }
    }
    ibias2 /= mass;
    ivar /= mass;
    Ok(RiskReport {
        estimator: setup.smoother.estimator,
        model: setup.model,
        n: setup.design.n(),
        m: setup.m,
        h,
        ibias2,
        ivar,
        imse: ibias2 + ivar,
        weight_density: setup.weight.label().to_string(),
        x_grid: setup.x_grid,
        skipped,
    })
}

/// Candidate bandwidths for a grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BandwidthGrid {
    /// `from, from + step, ...` up to `to` inclusive.
    Step {
        from: f64,
        to: f64,
        step: f64,
    },
    /// `count` equally spaced values from `from` to `to` inclusive.
    Linspace {
        from: f64,
        to: f64,
        count: usize,
    },
    List {
        values: Vec<f64>,
    },
}

impl Default for BandwidthGrid {
    fn default() -> Self {
        BandwidthGrid::Step {
            from: 0.09,
            to: 0.5,
            step: 0.001,
        }
    }
}

/// Rounds away the representation error of `from + i * step`.
fn tidy(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

impl BandwidthGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        let values = match self {
            BandwidthGrid::Step { from, to, step } => {
                if !(*step > 0.0) || !(to >= from) {
                    return Err(Error::param("grid", "step grid needs step > 0 and to >= from"));
                }
                let count = ((to - from) / step + 1e-9).floor() as usize + 1;
                (0..count).map(|i| tidy(from + i as f64 * step)).collect()
            }
            BandwidthGrid::Linspace { from, to, count } => match count {
                0 => Vec::new(),
                1 => vec![*from],
                _ => {
                    let c = (*count - 1) as f64;
                    (0..*count)
                        .map(|i| tidy(from + (to - from) * i as f64 / c))
                        .collect()
                }
            },
            BandwidthGrid::List { values } => values.clone(),
        };
        if values.is_empty() {
            return Err(Error::param("grid", "bandwidth grid is empty"));
        }
        if let Some(h) = values.iter().find(|h| !(**h > 0.0 && **h < 1.0)) {
            return Err(Error::param("grid", format!("bandwidth {h} is outside (0, 1)")));
        }
        Ok(values)
    }
}

/// Exact IMSE over a bandwidth grid and its minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthSearch {
    pub reports: Vec<RiskReport>,
    /// Index into `reports` of the smallest IMSE; ties go to the smaller `h`.
    pub best: usize,
}

impl BandwidthSearch {
    pub fn h_opt(&self) -> f64 {
        self.reports[self.best].h
    }

    pub fn best_report(&self) -> &RiskReport {
        &self.reports[self.best]
    }

    pub fn grid(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.h).collect()
    }
}

pub fn optimal_bandwidth_grid(setup: &RiskSetup, grid: &BandwidthGrid) -> Result<BandwidthSearch> {
    let hs = grid.values()?;
    let reports: Vec<RiskReport> = hs
        .par_iter()
        .map(|&h| exact_imse(setup, h))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, r) in reports.iter().enumerate() {
        let b = &reports[best];
        if r.imse < b.imse || (r.imse == b.imse && r.h < b.h) {
            best = i;
        }
    }
    Ok(BandwidthSearch { reports, best })
}

/// Writes `estimator, model, params, n, m, h, Ibias2, Ivar, IMSE, h_opt_flag`.
pub fn write_risk_csv<W: Write>(reports: &[RiskReport], h_opt: Option<f64>, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "estimator",
        "model",
        "params",
        "n",
        "m",
        "h",
        "Ibias2",
        "Ivar",
        "IMSE",
        "h_opt_flag",
    ])?;
    for r in reports {
        let flag = h_opt.is_some_and(|h| h == r.h);
        out.write_record([
            r.estimator.tag().to_string(),
            r.model.family_name().to_string(),
            r.model.params(),
            r.n.to_string(),
            r.m.to_string(),
            r.h.to_string(),
            format!("{:.6e}", r.ibias2),
            format!("{:.6e}", r.ivar),
            format!("{:.6e}", r.imse),
            u8::from(flag).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// The three terms of the leading-order IMSE expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticImse {
    /// `(1/m) ∫ (R(x,x) - (h/2) α C_K) w`.
    pub process: f64,
    /// `V / (12 m n² h) ∫ α w / f²`.
    pub discretization: f64,
    /// `(h⁴ B² / 4) ∫ (g'')² w`.
    pub bias: f64,
}

impl AsymptoticImse {
    pub fn total(&self) -> f64 {
        self.process + self.discretization + self.bias
    }
}

fn alpha_of(model: &CovModel) -> Result<JumpProfile> {
    model.validate()?;
    model.jump_profile()
}

fn curvature(g: &RegressionFunction, w: &WeightDensity) -> f64 {
    unit_integral(|x| {
        let c = g.second_derivative(x);
        c * c * w.eval(x)
    })
}

#[allow(clippy::too_many_arguments)]
pub fn asymptotic_imse(
    model: &CovModel,
    f: &DensitySpec,
    k: &Kernel,
    g: &RegressionFunction,
    w: &WeightDensity,
    n: usize,
    m: usize,
    h: f64,
) -> Result<AsymptoticImse> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::param(
            "h",
            format!("bandwidth must lie in (0, 1), got {h}"),
        ));
    }
    if n < 1 || m < 1 {
        return Err(Error::param("n", "n and m must be positive"));
    }
    let alpha = alpha_of(model)?;
    let c = k.constants();
    let (nf, mf) = (n as f64, m as f64);
    let process = unit_integral(|x| (model.eval(x, x) - 0.5 * h * alpha.eval(x) * c.c_k) * w.eval(x)) / mf;
    let disc_integral = unit_integral(|x| {
        let fx = f.eval(x);
        alpha.eval(x) * w.eval(x) / (fx * fx)
    });
    let discretization = c.v / (12.0 * mf * nf * nf * h) * disc_integral;
    let bias = h.powi(4) * c.b * c.b / 4.0 * curvature(g, w);
    Ok(AsymptoticImse {
        process,
        discretization,
        bias,
    })
}

/// `h* = (C_K ∫αw / (2 B² ∫(g'')² w))^(1/3) m^(-1/3)`.
pub fn asymptotic_optimal_bandwidth(
    model: &CovModel,
    k: &Kernel,
    g: &RegressionFunction,
    w: &WeightDensity,
    m: usize,
) -> Result<f64> {
    if m < 1 {
        return Err(Error::param("m", "need at least one replicate"));
    }
    let alpha = alpha_of(model)?;
    let curv = curvature(g, w);
    if !(curv > 1e-14) {
        return Err(Error::DegenerateCurvature(curv));
    }
    let c = k.constants();
    let aw = unit_integral(|x| alpha.eval(x) * w.eval(x));
    Ok((c.c_k * aw / (2.0 * c.b * c.b * curv)).cbrt() * (m as f64).powf(-1.0 / 3.0))
}

/// Relative IMSE reduction from sampling at the optimal density:
/// `1 - (∫(αw)^(1/3))³ / ∫αw`.
pub fn asymptotic_rimse(alpha: &JumpProfile, w: &WeightDensity) -> f64 {
    let num = unit_integral(|x| (alpha.eval(x) * w.eval(x)).cbrt()).powi(3);
    let den = unit_integral(|x| alpha.eval(x) * w.eval(x));
    1.0 - num / den
}

/// `Ψ(f) = ∫ α w / f²`.
pub fn minimax_psi(alpha: &JumpProfile, w: &WeightDensity, f: &DensitySpec) -> f64 {
    unit_integral(|x| {
        let fx = f.eval(x);
        alpha.eval(x) * w.eval(x) / (fx * fx)
    })
}

/// `σ²_{x,h} = ∫∫ φ_{x,h}(s) R(s,t) φ_{x,h}(t) ds dt`, by iterated Simpson in
/// kernel coordinates with the inner integral split on the diagonal.
pub fn sigma2_xh(model: &CovModel, k: &Kernel, x: f64, h: f64, panels: usize) -> Result<f64> {
    if !(x - h >= 0.0 && x + h <= 1.0) {
        return Err(Error::param(
            "x",
            format!("[x - h, x + h] = [{}, {}] leaves [0, 1]", x - h, x + h),
        ));
    }
    let r = |u: f64, v: f64| model.eval(x - h * u, x - h * v);
    let inner = |v: f64| {
        simpson(|u| k.eval(u) * r(u, v), -1.0, v, panels) + simpson(|u| k.eval(u) * r(u, v), v, 1.0, panels)
    };
    Ok(simpson(|v| k.eval(v) * inner(v), -1.0, 1.0, panels))
}

/// Outcome of the Monte Carlo normality check.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalityReport {
    pub replications: usize,
    /// Sample variance of `√m (ĝ(x) - g(x))`.
    pub variance_hat: f64,
    /// `R(x, x)`, the variance of the limiting normal law.
    pub target_variance: f64,
    /// `None` when the statistic is degenerate and the test is skipped.
    pub ks_statistic: Option<f64>,
    pub p_value: Option<f64>,
    /// Set when `(n, m, h)` is far from the regime `√m h² → 0`, `n h² → ∞`.
    pub regime_warning: Option<String>,
}

/// Asymptotic Kolmogorov p-value for a one-sample statistic `d` from `n` draws.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &v)| {
            let c = cdf(v);
            (c - i as f64 / n).max((i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max)
}

/// Simulates `replications` independent sample sets and tests
/// `√m (ĝ(x) - g(x))` against `N(0, R(x, x))`.
#[allow(clippy::too_many_arguments)]
pub fn normality_check(
    model: &CovModel,
    d: &Design,
    g: &RegressionFunction,
    smoother: &Smoother,
    m: usize,
    h: f64,
    x: f64,
    replications: usize,
    seed: u64,
) -> Result<NormalityReport> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::param(
            "x",
            format!("evaluation point {x} must be interior"),
        ));
    }
    if replications < 2 {
        return Err(Error::param("replications", "need at least two replications"));
    }
    let wv = smoother.weights(d, x, h)?;
    let sim = Simulator::new(model, d, g)?;
    let gx = g.eval(x);
    let sm = (m as f64).sqrt();
    let stats: Vec<f64> = (0..replications)
        .map(|r| {
            let s = sim.sample(m, derive_seed(seed, r as u64))?;
            Ok(sm * (wv.apply(&ybar(&s)) - gx))
        })
        .collect::<Result<_>>()?;
    let mean = stats.iter().sum::<f64>() / replications as f64;
    let variance_hat = stats.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (replications - 1) as f64;
    let target_variance = model.eval(x, x);

    let nf = d.n() as f64;
    let regime_warning = if sm * h * h > 0.1 || nf * h * h < 1.0 {
        Some(format!(
            "sqrt(m) h^2 = {:.3}, n h^2 = {:.3}; the normal limit assumes the first is small and the second large",
            sm * h * h,
            nf * h * h
        ))
    } else {
        None
    };

    let (ks_statistic, p_value) = if target_variance <= 1e-24 || variance_hat <= 1e-24 {
        (None, None)
    } else {
        let normal = Normal::new(0.0, target_variance.sqrt()).map_err(|e| Error::Numerical(e.to_string()))?;
        let dstat = ks_statistic(&stats, |v| normal.cdf(v));
        (Some(dstat), Some(ks_p_value(dstat, replications)))
    };
    Ok(NormalityReport {
        replications,
        variance_hat,
        target_variance,
        ks_statistic,
        p_value,
        regime_warning,
    })
}

impl fmt::Display for RiskReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} n={} m={} h={}: Ibias2={:.4e} Ivar={:.4e} IMSE={:.4e}",
            self.estimator, self.model, self.n, self.m, self.h, self.ibias2, self.ivar, self.imse
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::midpoint_design;
    use approx::assert_relative_eq;

    fn wiener_setup(kind: EstimatorKind, m: usize) -> RiskSetup {
        let d = midpoint_design(20).unwrap();
        let s = Smoother::new(kind, Kernel::quadratic(), DensitySpec::uniform());
        RiskSetup::new(
            d,
            s,
            RegressionFunction::CubicGrowth,
            CovModel::Wiener { sigma2: 1.0 },
            m,
        )
        .unwrap()
    }

    #[test]
    fn pointwise_matches_double_loop() {
        let d = Design::from_points(vec![0.2, 0.5, 0.9]).unwrap();
        let model = CovModel::Wiener { sigma2: 1.0 };
        let cov = CovMatrix::from_matrix(raw_cov_matrix(&model, d.points())).unwrap();
        let w = vec![0.3, -0.7, 1.9];
        let wv = WeightVector {
            x: 0.4,
            h: 0.5,
            weights: w.clone(),
            support: crate::design::Window { start: 0, end: 3 },
            estimator: EstimatorKind::Trapezoid,
            boundary_mode: crate::estimators::BoundaryMode::None,
            n_window: 3,
        };
        let (_, var) = pointwise_risk(&wv, &d, &RegressionFunction::CubicGrowth, &cov, 2);
        let mut oracle = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                oracle += w[i] * w[j] * d.points()[i].min(d.points()[j]);
            }
        }
        assert_relative_eq!(var, oracle / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn constants_are_unbiased_and_zero_model_has_no_variance() {
        let d = midpoint_design(30).unwrap();
        let s = Smoother::new(
            EstimatorKind::GasserMuller,
            Kernel::quadratic(),
            DensitySpec::uniform(),
        );
        let setup = RiskSetup::new(d, s, RegressionFunction::constant(2.0), CovModel::Zero, 3).unwrap();
        let r = exact_imse(&setup, 0.2).unwrap();
        assert!(r.ibias2 < 1e-24);
        assert_eq!(r.ivar, 0.0);
    }

    #[test]
    fn imse_decomposes_and_variance_scales() {
        let a = exact_imse(&wiener_setup(EstimatorKind::GasserMuller, 5), 0.3).unwrap();
        let b = exact_imse(&wiener_setup(EstimatorKind::GasserMuller, 10), 0.3).unwrap();
        assert_eq!(a.imse, a.ibias2 + a.ivar);
        assert_relative_eq!(a.ivar, 2.0 * b.ivar, max_relative = 1e-12);
        assert_eq!(a.ibias2, b.ibias2);
    }

    #[test]
    fn too_many_skipped_points() {
        let d = midpoint_design(10).unwrap();
        let s = Smoother::new(
            EstimatorKind::Trapezoid,
            Kernel::quadratic(),
            DensitySpec::uniform(),
        );
        let setup = RiskSetup::new(
            d,
            s,
            RegressionFunction::CubicGrowth,
            CovModel::Wiener { sigma2: 1.0 },
            2,
        )
        .unwrap();
        assert!(matches!(
            exact_imse(&setup, 0.06),
            Err(Error::TooManySkipped { .. })
        ));
        let zero = setup.with_policy(EmptyWindowPolicy::Zero);
        let r = exact_imse(&zero, 0.06).unwrap();
        assert_eq!(r.skipped, 0);
    }

    #[test]
    fn grids() {
        let v = BandwidthGrid::default().values().unwrap();
        assert_eq!(v.len(), 411);
        assert_eq!(v[0], 0.09);
        assert_eq!(v[321], 0.411);
        assert_eq!(v[410], 0.5);
        let l = BandwidthGrid::Linspace {
            from: 0.099,
            to: 0.5,
            count: 10,
        }
        .values()
        .unwrap();
        assert!((l[7] - 0.4109).abs() < 1e-4);
        assert!(BandwidthGrid::List { values: vec![] }.values().is_err());
        assert!(BandwidthGrid::List { values: vec![1.2] }.values().is_err());
    }

    #[test]
    fn single_element_grid() {
        let setup = wiener_setup(EstimatorKind::Trapezoid, 5);
        let s = optimal_bandwidth_grid(&setup, &BandwidthGrid::List { values: vec![0.25] }).unwrap();
        assert_eq!(s.h_opt(), 0.25);
    }

    #[test]
    fn asymptotic_terms() {
        let model = CovModel::Wiener { sigma2: 1.0 };
        let k = Kernel::quadratic();
        let g = RegressionFunction::CubicGrowth;
        let f = DensitySpec::uniform();
        let w = WeightDensity::Uniform;
        let a = asymptotic_imse(&model, &f, &k, &g, &w, 20, 5, 0.3).unwrap();
        let b = asymptotic_imse(&model, &f, &k, &g, &w, 20, 10, 0.3).unwrap();
        assert_relative_eq!(a.process, 2.0 * b.process, max_relative = 1e-14);
        assert_relative_eq!(a.discretization, 2.0 * b.discretization, max_relative = 1e-14);
        assert_eq!(a.bias, b.bias);
        // ∫ (60x - 180x² + 120x³)² dx = 3600/3 - 21600/4 + (32400 + 14400)/5 - 43200/6 + 14400/7
        let hand = 1200.0 - 5400.0 + 9360.0 - 7200.0 + 14400.0 / 7.0;
        assert_relative_eq!(curvature(&g, &w), hand, max_relative = 1e-12);
        let c = k.constants();
        assert_relative_eq!(
            a.bias,
            0.3f64.powi(4) * c.b * c.b / 4.0 * hand,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            a.discretization,
            c.v / (12.0 * 5.0 * 400.0 * 0.3),
            max_relative = 1e-12
        );
    }

    #[test]
    fn optimal_bandwidth_scaling() {
        let model = CovModel::Wiener { sigma2: 0.5 };
        let k = Kernel::quadratic();
        let g = RegressionFunction::CubicGrowth;
        let w = WeightDensity::Uniform;
        let h1 = asymptotic_optimal_bandwidth(&model, &k, &g, &w, 15).unwrap();
        let h8 = asymptotic_optimal_bandwidth(&model, &k, &g, &w, 120).unwrap();
        assert_relative_eq!(h8, h1 / 2.0, max_relative = 1e-14);
        let lin = RegressionFunction::polynomial(vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            asymptotic_optimal_bandwidth(&model, &k, &lin, &w, 15),
            Err(Error::DegenerateCurvature(_))
        ));
    }

    #[test]
    fn rimse_reference_values() {
        let w = WeightDensity::Uniform;
        let t2 = JumpProfile::Power {
            scale: 1.0,
            exponent: 2.0,
        };
        assert_relative_eq!(asymptotic_rimse(&t2, &w), 44.0 / 125.0, epsilon = 1e-10);
        let t3 = JumpProfile::Power {
            scale: 2.0,
            exponent: 3.0,
        };
        assert_relative_eq!(asymptotic_rimse(&t3, &w), 0.5, epsilon = 1e-10);
        assert!(asymptotic_rimse(&JumpProfile::constant(4.0), &w).abs() < 1e-12);
    }

    #[test]
    fn psi_reference_values() {
        let e1 = 0.3;
        let e2 = 1.7;
        let w = WeightDensity::General(std::sync::Arc::new(move |_| e2));
        let psi = minimax_psi(&JumpProfile::constant(e1), &w, &DensitySpec::uniform());
        assert_relative_eq!(psi, e1 * e2, max_relative = 1e-14);
    }

    #[test]
    fn sigma2_xh_matches_expansion() {
        let model = CovModel::Wiener { sigma2: 1.0 };
        let k = Kernel::quadratic();
        let h = 0.01;
        let s = sigma2_xh(&model, &k, 0.5, h, 800).unwrap();
        // For the Wiener process the expansion is exact in h.
        assert_relative_eq!(s, 0.5 - 0.5 * k.constants().c_k * h, max_relative = 1e-10);
        assert!(sigma2_xh(&model, &k, 0.05, 0.1, 50).is_err());
    }

    #[test]
    fn ks_p_value_reference() {
        // Kolmogorov distribution: P(K > 1.36) ≈ 0.049
        let p = ks_p_value(1.36 / 100f64.sqrt(), 100);
        assert!((p - 0.05).abs() < 0.01, "{p}");
        assert_eq!(ks_p_value(0.0, 50), 1.0);
    }
}
