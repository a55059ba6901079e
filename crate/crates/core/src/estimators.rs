//! Trapezoidal and Gasser-Müller kernel estimators as linear-smoother weights.
//!
//! Both estimators evaluate to `Σ wᵢ ȳ(tᵢ)` for a weight vector that depends
//! only on the design, the kernel and the bandwidth, so exact risk is a matter
//! of linear algebra on the weights.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::design::{window_points, DensitySpec, Design, Window};
use crate::error::{Error, Result};
use crate::gp_sim::{ybar, SampleSet};
use crate::kernels::{kernel_cdf_integral, phi, Kernel};

/// Weight sums at or below this are treated as carrying no mass.
const ZERO_MASS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    #[serde(alias = "trap")]
    Trapezoid,
    #[serde(alias = "gm")]
    GasserMuller,
}

impl EstimatorKind {
    pub fn tag(&self) -> &'static str {
        match self {
            EstimatorKind::Trapezoid => "trap",
            EstimatorKind::GasserMuller => "gm",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "trap" | "trapezoid" | "trapezoidal" => Ok(EstimatorKind::Trapezoid),
            "gm" | "gasser-muller" | "gasser-müller" => Ok(EstimatorKind::GasserMuller),
            other => Err(Error::Parse(format!("unknown estimator `{other}`"))),
        }
    }
}

/// Treatment of evaluation points within `h` of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryMode {
    None,
    /// Rescale the truncated weights to unit sum.
    #[default]
    RenormalizedTruncation,
}

/// Smoother weights for one evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub x: f64,
    pub h: f64,
    /// Aligned with the design points; zero outside `support`.
    pub weights: Vec<f64>,
    /// Index range holding every nonzero weight.
    pub support: Window,
    pub estimator: EstimatorKind,
    pub boundary_mode: BoundaryMode,
    /// Design points inside `[x - h, x + h]`.
    pub n_window: usize,
}

impl WeightVector {
    pub fn sum(&self) -> f64 {
        self.weights[self.support.indices()].iter().sum()
    }

    /// `Σ wᵢ yᵢ`.
    pub fn apply(&self, y: &[f64]) -> f64 {
        self.support.indices().map(|i| self.weights[i] * y[i]).sum()
    }

    /// Whether `x` lies in `[0, h) ∪ (1 - h, 1]`.
    pub fn in_boundary_region(&self) -> bool {
        self.x < self.h || self.x > 1.0 - self.h
    }
}

fn check_bandwidth(h: f64) -> Result<()> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(Error::param(
            "h",
            format!("bandwidth must lie in (0, 1), got {h}"),
        ))
    }
}

/// Trapezoidal weights: the window points `t_{x,1..N}` get `φ/f` scaled by
/// `1/n` in the interior of the window and `1/(2n)` at its two ends.
pub fn trap_weights(d: &Design, f: &DensitySpec, x: f64, h: f64, k: &Kernel) -> Result<WeightVector> {
    check_bandwidth(h)?;
    let win = window_points(d, x, h);
    let count = win.count();
    if count <= 1 {
        return Err(Error::EmptyWindow { x, h, count });
    }
    let n = d.n() as f64;
    let t = d.points();
    let mut weights = vec![0.0; d.n()];
    for i in win.indices() {
        let fi = f.eval(t[i]);
        if !(fi > 0.0 && fi.is_finite()) {
            return Err(Error::InvalidDensity(format!(
                "density is {fi} at design point {}",
                t[i]
            )));
        }
        let scale = if i == win.start || i + 1 == win.end {
            0.5 / n
        } else {
            1.0 / n
        };
        weights[i] = scale * phi(x, h, t[i], k) / fi;
    }
    Ok(WeightVector {
        x,
        h,
        weights,
        support: win,
        estimator: EstimatorKind::Trapezoid,
        boundary_mode: BoundaryMode::None,
        n_window: count,
    })
}

/// Gasser-Müller weights: `∫ φ_{x,h}` over the cell `[m_{i-1}, m_i]`, where the
/// cells split `[0, 1]` at the midpoints between design points.
pub fn gm_weights(d: &Design, x: f64, h: f64, k: &Kernel) -> Result<WeightVector> {
    check_bandwidth(h)?;
    let t = d.points();
    let n = t.len();
    let mut weights = vec![0.0; n];
    let mut lo = n;
    let mut hi = 0;
    let mut left = 0.0;
    for i in 0..n {
        let right = if i + 1 == n { 1.0 } else { 0.5 * (t[i] + t[i + 1]) };
        if right > x - h && left < x + h {
            // t ∈ [left, right] maps to u = (x - t)/h ∈ [(x - right)/h, (x - left)/h]
            let w = kernel_cdf_integral(k, (x - right) / h, (x - left) / h);
            weights[i] = w;
            if w != 0.0 {
                lo = lo.min(i);
                hi = i + 1;
            }
        }
        left = right;
    }
    let support = if lo < hi {
        Window { start: lo, end: hi }
    } else {
        Window { start: 0, end: 0 }
    };
    Ok(WeightVector {
        x,
        h,
        weights,
        support,
        estimator: EstimatorKind::GasserMuller,
        boundary_mode: BoundaryMode::None,
        n_window: window_points(d, x, h).count(),
    })
}

/// Renormalizes the weights to unit sum when `x` is within `h` of an edge;
/// interior weights pass through unchanged.
pub fn boundary_correct(mut wv: WeightVector) -> Result<WeightVector> {
    wv.boundary_mode = BoundaryMode::RenormalizedTruncation;
    if !wv.in_boundary_region() {
        return Ok(wv);
    }
    let sum = wv.sum();
    if !(sum > ZERO_MASS) {
        return Err(Error::ZeroMass { x: wv.x, sum });
    }
    for i in wv.support.indices() {
        wv.weights[i] /= sum;
    }
    Ok(wv)
}

/// Everything needed to turn a design and an evaluation point into weights.
#[derive(Debug, Clone)]
pub struct Smoother {
    pub estimator: EstimatorKind,
    pub boundary: BoundaryMode,
    pub kernel: Kernel,
    /// The design density; only the trapezoidal estimator reads it.
    pub density: DensitySpec,
}

impl Smoother {
    pub fn new(estimator: EstimatorKind, kernel: Kernel, density: DensitySpec) -> Self {
        Smoother {
            estimator,
            boundary: BoundaryMode::default(),
            kernel,
            density,
        }
    }

    pub fn with_boundary(mut self, boundary: BoundaryMode) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn weights(&self, d: &Design, x: f64, h: f64) -> Result<WeightVector> {
        let wv = match self.estimator {
            EstimatorKind::Trapezoid => trap_weights(d, &self.density, x, h, &self.kernel)?,
            EstimatorKind::GasserMuller => gm_weights(d, x, h, &self.kernel)?,
        };
        match self.boundary {
            BoundaryMode::None => Ok(wv),
            BoundaryMode::RenormalizedTruncation => boundary_correct(wv),
        }
    }
}

/// One evaluation of an estimated curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    /// `None` where the smoothing window is empty.
    pub ghat: Option<f64>,
    pub n_window: usize,
    pub boundary: bool,
}

/// Evaluates the estimator on `grid` from the replicate mean of `s`.
pub fn estimate_curve(s: &SampleSet, grid: &[f64], h: f64, smoother: &Smoother) -> Result<Vec<CurvePoint>> {
    if let Some(x) = grid.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
        return Err(Error::param(
            "grid",
            format!("evaluation point {x} is outside (0, 1)"),
        ));
    }
    let y = ybar(s);
    grid.iter()
        .map(|&x| {
            let boundary = x < h || x > 1.0 - h;
            match smoother.weights(&s.design, x, h) {
                Ok(wv) => Ok(CurvePoint {
                    x,
                    ghat: Some(wv.apply(&y)),
                    n_window: wv.n_window,
                    boundary,
                }),
                Err(Error::EmptyWindow { count, .. }) => Ok(CurvePoint {
                    x,
                    ghat: None,
                    n_window: count,
                    boundary,
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Writes `x, ghat, n_window, boundary_flag`; missing estimates are `NA`.
pub fn write_curve_csv<W: Write>(curve: &[CurvePoint], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "ghat", "n_window", "boundary_flag"])?;
    for p in curve {
        let ghat = p.ghat.map_or_else(|| "NA".to_string(), |v| v.to_string());
        out.write_record([
            p.x.to_string(),
            ghat,
            p.n_window.to_string(),
            u8::from(p.boundary).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
