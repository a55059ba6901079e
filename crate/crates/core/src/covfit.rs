//! Covariance fitting from replicated curves and the plug-in design loop.
//!
//! The generalized Ornstein-Uhlenbeck parameters `(σ², λ, ρ)` are estimated by
//! least squares against the empirical covariance, minimized with simulated
//! annealing followed by a short Nelder-Mead polish.

use std::io::Write;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::CovModel;
use crate::design::{midpoint_design, regular_design, DensitySpec, Design};
use crate::error::{Error, Result};
use crate::estimators::{BoundaryMode, EstimatorKind, Smoother};
use crate::gp_sim::{derive_seed, RegressionFunction, SampleSet, Simulator};
use crate::kernels::Kernel;
use crate::risk::{exact_imse, EmptyWindowPolicy, RiskSetup, XGrid};

/// `R̂(tᵢ, tⱼ)` with the unbiased `1 / (m - 1)` normalization.
pub fn empirical_cov(s: &SampleSet) -> Result<DMatrix<f64>> {
    let m = s.m();
    if m < 2 {
        return Err(Error::InsufficientReplicates(m));
    }
    let mut centered = s.y.clone();
    for mut col in centered.column_iter_mut() {
        let mean = col.sum() / m as f64;
        col.add_scalar_mut(-mean);
    }
    let mut r = centered.transpose() * &centered;
    r /= (m - 1) as f64;
    // exact symmetry regardless of summation order
    let n = r.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (r[(i, j)] + r[(j, i)]);
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    Ok(r)
}

/// `(1/n²) ΣᵢΣⱼ (R̂(tᵢ,tⱼ) - R(tᵢ,tⱼ))²`.
pub fn q_criterion(rhat: &DMatrix<f64>, model: &CovModel, d: &Design) -> Result<f64> {
    let n = d.n();
    if rhat.nrows() != n || rhat.ncols() != n {
        return Err(Error::param(
            "rhat",
            format!(
                "{}x{} matrix for a design of {n} points",
                rhat.nrows(),
                rhat.ncols()
            ),
        ));
    }
    let t = d.points();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let e = rhat[(i, j)] - model.eval(t[i], t[j]);
            acc += e * e;
        }
    }
    Ok(acc / (n * n) as f64)
}

/// Search box for `(σ², λ, ρ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub sigma2: (f64, f64),
    pub lambda: (f64, f64),
    pub rho: (f64, f64),
}

impl Default for ParamBox {
    fn default() -> Self {
        ParamBox {
            sigma2: (1e-4, 10.0),
            lambda: (0.1, 10.0),
            rho: (0.01, 0.99),
        }
    }
}

impl ParamBox {
    pub fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        if !(ok(self.sigma2) && ok(self.lambda) && ok(self.rho)) {
            return Err(Error::param("box", "each parameter range needs finite lo < hi"));
        }
        if self.sigma2.0 <= 0.0 || self.lambda.0 <= 0.0 || self.rho.0 <= 0.0 || self.rho.1 >= 1.0 {
            return Err(Error::param(
                "box",
                "ranges must keep sigma2 > 0, lambda > 0 and rho inside (0, 1)",
            ));
        }
        Ok(())
    }

    fn params_at(&self, u: [f64; 3]) -> [f64; 3] {
        let lerp = |(lo, hi): (f64, f64), v: f64| lo + (hi - lo) * v;
        [
            lerp(self.sigma2, u[0]),
            lerp(self.lambda, u[1]),
            lerp(self.rho, u[2]),
        ]
    }
}

/// Simulated annealing settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealSchedule {
    /// Starting temperature; `None` uses the criterion at the box center.
    pub t0: Option<f64>,
    pub cooling: f64,
    pub stages: usize,
    pub proposals_per_stage: usize,
    /// Proposal standard deviation as a fraction of each box side.
    pub step: f64,
    /// Run a Nelder-Mead polish from the best annealing point.
    pub polish: bool,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            t0: None,
            cooling: 0.97,
            stages: 200,
            proposals_per_stage: 50,
            step: 0.05,
            polish: true,
        }
    }
}

impl AnnealSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::param("cooling", "must lie in (0, 1)"));
        }
        if self.stages == 0 || self.proposals_per_stage == 0 {
            return Err(Error::param("stages", "need at least one stage and proposal"));
        }
        if !(self.step > 0.0 && self.step <= 1.0) {
            return Err(Error::param("step", "must lie in (0, 1]"));
        }
        if let Some(t0) = self.t0 {
            if !(t0 > 0.0 && t0.is_finite()) {
                return Err(Error::param("t0", "must be positive"));
            }
        }
        Ok(())
    }
}

/// Estimated generalized Ornstein-Uhlenbeck parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub sigma2_hat: f64,
    pub lambda_hat: f64,
    pub rho_hat: f64,
    pub q_value: f64,
    pub evaluations: usize,
    pub seed: u64,
}

impl FitResult {
    pub fn model(&self) -> CovModel {
        CovModel::GeneralizedOu {
            sigma2: self.sigma2_hat,
            lambda: self.lambda_hat,
            rho: self.rho_hat,
        }
    }
}

/// The criterion specialized to the generalized Ornstein-Uhlenbeck family,
/// with `ln tᵢ` cached so each evaluation costs `n` powers and `n²/2`
/// exponentials.
struct GenOuObjective<'a> {
    rhat: &'a DMatrix<f64>,
    log_t: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> GenOuObjective<'a> {
    fn new(rhat: &'a DMatrix<f64>, d: &Design) -> Result<Self> {
        let n = d.n();
        if rhat.nrows() != n || rhat.ncols() != n {
            return Err(Error::param("rhat", "dimension does not match the design"));
        }
        if d.points()[0] <= 0.0 {
            return Err(Error::param("design", "fitting needs design points in (0, 1]"));
        }
        Ok(GenOuObjective {
            rhat,
            log_t: d.points().iter().map(|t| t.ln()).collect(),
            scratch: vec![0.0; n],
        })
    }

    fn eval(&mut self, [sigma2, lambda, rho]: [f64; 3]) -> f64 {
        let n = self.log_t.len();
        for (p, lt) in self.scratch.iter_mut().zip(&self.log_t) {
            *p = (lambda * lt).exp();
        }
        let c = rho.ln() / lambda;
        let mut acc = 0.0;
        for i in 0..n {
            let e = self.rhat[(i, i)] - sigma2;
            acc += e * e;
            for j in 0..i {
                let r = sigma2 * (c * (self.scratch[i] - self.scratch[j]).abs()).exp();
                let e1 = self.rhat[(i, j)] - r;
                let e2 = self.rhat[(j, i)] - r;
                acc += e1 * e1 + e2 * e2;
            }
        }
        acc / (n * n) as f64
    }
}

fn reflect(mut v: f64) -> f64 {
    // fold onto [0, 1]; proposals are small so a couple of passes suffice
    for _ in 0..8 {
        if v < 0.0 {
            v = -v;
        } else if v > 1.0 {
            v = 2.0 - v;
        } else {
            return v;
        }
    }
    v.clamp(0.0, 1.0)
}

/// Fits to the empirical covariance of `s`.
pub fn anneal_fit(
    s: &SampleSet,
    bounds: &ParamBox,
    schedule: &AnnealSchedule,
    seed: u64,
) -> Result<FitResult> {
    let rhat = empirical_cov(s)?;
    anneal_fit_cov(&rhat, &s.design, bounds, schedule, seed)
}

/// Fits to a given covariance matrix over the design.
pub fn anneal_fit_cov(
    rhat: &DMatrix<f64>,
    d: &Design,
    bounds: &ParamBox,
    schedule: &AnnealSchedule,
    seed: u64,
) -> Result<FitResult> {
    bounds.validate()?;
    schedule.validate()?;
    let mut obj = GenOuObjective::new(rhat, d)?;
    let mut evaluations = 0usize;
    let mut q = |u: [f64; 3], evaluations: &mut usize| {
        *evaluations += 1;
        obj.eval(bounds.params_at(u))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut cur = [0.5; 3];
    let mut q_cur = q(cur, &mut evaluations);
    let mut best = cur;
    let mut q_best = q_cur;
    let mut temp = schedule.t0.unwrap_or(q_cur).max(f64::MIN_POSITIVE);
    for _ in 0..schedule.stages {
        for _ in 0..schedule.proposals_per_stage {
            let mut cand = cur;
            for c in cand.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *c = reflect(*c + schedule.step * z);
            }
            let q_cand = q(cand, &mut evaluations);
            let accept = q_cand <= q_cur || rng.random::<f64>() < (-(q_cand - q_cur) / temp).exp();
            if accept {
                cur = cand;
                q_cur = q_cand;
                if q_cur < q_best {
                    best = cur;
                    q_best = q_cur;
                }
            }
        }
        temp *= schedule.cooling;
    }

    if schedule.polish {
        let (u, v) = nelder_mead(|u| q(u, &mut evaluations), best, 0.02, 600);
        if v < q_best {
            best = u;
            q_best = v;
        }
    }

    let [sigma2_hat, lambda_hat, rho_hat] = bounds.params_at(best);
    Ok(FitResult {
        sigma2_hat,
        lambda_hat,
        rho_hat,
        q_value: q_best,
        evaluations,
        seed,
    })
}

/// Nelder-Mead on the unit cube; vertices are clamped into the cube.
fn nelder_mead(
    mut f: impl FnMut([f64; 3]) -> f64,
    start: [f64; 3],
    step: f64,
    max_iter: usize,
) -> ([f64; 3], f64) {
    let clamp = |mut p: [f64; 3]| {
        p.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        p
    };
    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
    simplex.push((start, f(start)));
    for k in 0..3 {
        let mut p = start;
        p[k] += if p[k] + step <= 1.0 { step } else { -step };
        let p = clamp(p);
        simplex.push((p, f(p)));
    }
    let lerp = |a: [f64; 3], b: [f64; 3], t: f64| {
        clamp([
            a[0] + t * (b[0] - a[0]),
            a[1] + t * (b[1] - a[1]),
            a[2] + t * (b[2] - a[2]),
        ])
    };
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if (simplex[3].1 - simplex[0].1).abs() <= 1e-16 * (1.0 + simplex[0].1.abs()) {
            break;
        }
        let mut c = [0.0; 3];
        for (p, _) in &simplex[..3] {
            for k in 0..3 {
                c[k] += p[k] / 3.0;
            }
        }
        let worst = simplex[3];
        let r = lerp(c, worst.0, -1.0);
        let fr = f(r);
        if fr < simplex[0].1 {
            let e = lerp(c, worst.0, -2.0);
            let fe = f(e);
            simplex[3] = if fe < fr { (e, fe) } else { (r, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (r, fr);
        } else {
            let (k, fk) = if fr < worst.1 {
                let k = lerp(c, r, 0.5);
                (k, f(k))
            } else {
                let k = lerp(c, worst.0, 0.5);
                (k, f(k))
            };
            if fk < worst.1.min(fr) {
                simplex[3] = (k, fk);
            } else {
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    let p = lerp(best, v.0, 0.5);
                    *v = (p, f(p));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0]
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Componentwise median of the fits, with the criterion re-evaluated there
/// against `rhat`.
pub fn median_fit(fits: &[FitResult], rhat: &DMatrix<f64>, d: &Design) -> Result<FitResult> {
    if fits.is_empty() {
        return Err(Error::param("fits", "need at least one fit"));
    }
    let out = FitResult {
        sigma2_hat: median(fits.iter().map(|f| f.sigma2_hat).collect()),
        lambda_hat: median(fits.iter().map(|f| f.lambda_hat).collect()),
        rho_hat: median(fits.iter().map(|f| f.rho_hat).collect()),
        q_value: 0.0,
        evaluations: fits.iter().map(|f| f.evaluations).sum(),
        seed: fits[0].seed,
    };
    let q_value = q_criterion(rhat, &out.model(), d)?;
    Ok(FitResult { q_value, ..out })
}

/// Writes `seed, sigma2_hat, lambda_hat, rho_hat, q_value`.
pub fn write_fit_csv<W: Write>(fits: &[FitResult], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["seed", "sigma2_hat", "lambda_hat", "rho_hat", "q_value"])?;
    for f in fits {
        out.write_record([
            f.seed.to_string(),
            f.sigma2_hat.to_string(),
            f.lambda_hat.to_string(),
            f.rho_hat.to_string(),
            format!("{:e}", f.q_value),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Inputs of the uniform versus optimal versus plug-in design comparison.
#[derive(Debug, Clone)]
pub struct PluginExperiment {
    pub n: usize,
    pub m: usize,
    /// Must be the generalized Ornstein-Uhlenbeck family.
    pub model: CovModel,
    pub h: f64,
    pub seed: u64,
    pub fits: usize,
    pub kernel: Kernel,
    pub g: RegressionFunction,
    pub bounds: ParamBox,
    pub schedule: AnnealSchedule,
    pub x_grid: XGrid,
    pub policy: EmptyWindowPolicy,
}

impl PluginExperiment {
    pub fn new(n: usize, m: usize, model: CovModel, h: f64, seed: u64) -> Self {
        PluginExperiment {
            n,
            m,
            model,
            h,
            seed,
            fits: 100,
            kernel: Kernel::quadratic(),
            g: RegressionFunction::CubicGrowth,
            bounds: ParamBox::default(),
            schedule: AnnealSchedule::default(),
            x_grid: XGrid::default(),
            policy: EmptyWindowPolicy::Zero,
        }
    }
}

/// One row of the design comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub n: usize,
    pub m: usize,
    pub imse_unif: f64,
    pub imse_opt: f64,
    pub rimse_lambda: f64,
    pub imse_opt_hat: f64,
    pub rimse_lambda_hat: f64,
    pub fit: FitResult,
}

fn trap_imse(e: &PluginExperiment, design: Design, density: DensitySpec) -> Result<f64> {
    let smoother = Smoother::new(EstimatorKind::Trapezoid, e.kernel.clone(), density)
        .with_boundary(BoundaryMode::RenormalizedTruncation);
    let setup = RiskSetup::new(design, smoother, e.g.clone(), e.model, e.m)?
        .with_x_grid(e.x_grid)
        .with_policy(e.policy);
    Ok(exact_imse(&setup, e.h)?.imse)
}

/// Exact trapezoidal IMSE under the uniform (midpoint) design, the optimal
/// design for the true `λ`, and the optimal design for the median fitted `λ̂`.
///
/// The fits use data simulated on the uniform design.
pub fn plugin_design_experiment(e: &PluginExperiment) -> Result<ReductionReport> {
    let CovModel::GeneralizedOu { lambda, .. } = e.model else {
        return Err(Error::param(
            "model",
            "the plug-in design comparison needs the gen-ou family",
        ));
    };
    e.model.validate()?;
    if e.fits == 0 {
        return Err(Error::param("fits", "need at least one fit"));
    }
    if e.m < 2 {
        return Err(Error::InsufficientReplicates(e.m));
    }
    let uniform = midpoint_design(e.n)?;
    let sim = Simulator::new(&e.model, &uniform, &e.g)?;
    let fits: Vec<(FitResult, Option<DMatrix<f64>>)> = (0..e.fits)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(e.seed, r as u64);
            let s = sim.sample(e.m, seed)?;
            let rhat = empirical_cov(&s)?;
            let fit = anneal_fit_cov(
                &rhat,
                &uniform,
                &e.bounds,
                &e.schedule,
                derive_seed(seed, u64::MAX),
            )?;
            Ok((fit, (r == 0).then_some(rhat)))
        })
        .collect::<Result<_>>()?;
    let reference = fits[0].1.clone().expect("first replicate keeps its covariance");
    let fit_list: Vec<FitResult> = fits.into_iter().map(|(f, _)| f).collect();
    let fit = median_fit(&fit_list, &reference, &uniform)?;

    let optimal = |l: f64| -> Result<f64> {
        let f = DensitySpec::optimal_power(l)?;
        trap_imse(e, regular_design(&f, e.n)?, f)
    };
    let imse_unif = trap_imse(e, uniform, DensitySpec::uniform())?;
    let imse_opt = optimal(lambda)?;
    let imse_opt_hat = optimal(fit.lambda_hat)?;
    Ok(ReductionReport {
        n: e.n,
        m: e.m,
        imse_unif,
        imse_opt,
        rimse_lambda: (imse_unif - imse_opt) / imse_unif,
        imse_opt_hat,
        rimse_lambda_hat: (imse_unif - imse_opt_hat) / imse_unif,
        fit,
    })
}

/// Writes `m, IMSE_unif, IMSE_opt, rIMSE_λ, IMSE_opt_hat, rIMSE_λ̂, λ̂`.
pub fn write_reduction_csv<W: Write>(rows: &[ReductionReport], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "m",
        "IMSE_unif",
        "IMSE_opt",
        "rIMSE_λ",
        "IMSE_opt_hat",
        "rIMSE_λ̂",
        "λ̂",
    ])?;
    for r in rows {
        out.write_record([
            r.m.to_string(),
            format!("{:.6e}", r.imse_unif),
            format!("{:.6e}", r.imse_opt),
            format!("{:.6}", r.rimse_lambda),
            format!("{:.6e}", r.imse_opt_hat),
            format!("{:.6}", r.rimse_lambda_hat),
            format!("{:.4}", r.fit.lambda_hat),
        ])?;
    }
    out.flush()?;
    Ok(())
}
