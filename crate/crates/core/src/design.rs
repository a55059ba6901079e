//! Sampling designs on `[0, 1]` and the densities that generate them.
//!
//! A regular design of size `n` generated by a density `f` with distribution
//! function `F` places its points at `F⁻¹(i / n)`, `i = 1..=n`. The midpoint
//! design `(i - 0.5) / n` is provided separately. [`optimal_design_density`]
//! builds the density proportional to `(α w)^(1/3)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::covariance::JumpProfile;
use crate::error::{Error, Result};
use crate::quad::{tanh_sinh, unit_integral};

const VALIDATION_GRID: usize = 10_000;
const NORMALIZATION_TOL: f64 = 1e-8;
const INVERSION_TOL: f64 = 1e-12;

/// How a design was produced; echoed into output metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    /// `i / n`.
    Uniform,
    /// `(i - 0.5) / n`.
    Midpoint,
    RegularFromDensity {
        density: String,
    },
    /// `(i / n)^(3 / (λ + 2))`.
    OptimalPower {
        lambda: f64,
    },
    /// Points supplied directly.
    Explicit,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Uniform => f.write_str("uniform"),
            Provenance::Midpoint => f.write_str("midpoint"),
            Provenance::RegularFromDensity { density } => write!(f, "regular({density})"),
            Provenance::OptimalPower { lambda } => write!(f, "optimal-power(lambda={lambda})"),
            Provenance::Explicit => f.write_str("explicit"),
        }
    }
}

/// Strictly increasing sampling points in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    points: Vec<f64>,
    provenance: Provenance,
}

impl Design {
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        Self::with_provenance(points, Provenance::Explicit)
    }

    pub fn with_provenance(points: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::param("points", "design must contain at least one point"));
        }
        if points.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::param("points", "design points must lie in [0, 1]"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param(
                "points",
                "design points must be strictly increasing",
            ));
        }
        Ok(Design { points, provenance })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Largest gap between consecutive points, including the gaps to 0 and 1.
    pub fn max_spacing(&self) -> f64 {
        let first = self.points[0];
        let last = 1.0 - self.points[self.points.len() - 1];
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(first.max(last), f64::max)
    }
}

/// The design points in `[x - h, x + h]`, as the index range `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: usize,
    pub end: usize,
}

impl Window {
    pub fn count(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }
}

/// Index range of the design points inside `[x - h, x + h]`.
pub fn window_points(d: &Design, x: f64, h: f64) -> Window {
    let lo = x - h;
    let hi = x + h;
    let start = d.points.partition_point(|&t| t < lo);
    let end = d.points.partition_point(|&t| t <= hi);
    Window {
        start,
        end: end.max(start),
    }
}

#[derive(Clone)]
enum DensityKind {
    Uniform,
    /// `(p + 1) t^p`, with distribution function `t^(p + 1)`.
    Power {
        exponent: f64,
    },
    /// `pdf(t) / norm`.
    General {
        pdf: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        norm: f64,
    },
}

/// A sampling density on `[0, 1]` with its distribution function.
#[derive(Clone)]
pub struct DensitySpec {
    kind: DensityKind,
    label: String,
    bounds: (f64, f64),
}

impl fmt::Debug for DensitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensitySpec")
            .field("label", &self.label)
            .field("bounds", &self.bounds)
            .finish()
    }
}

impl DensitySpec {
    pub fn uniform() -> Self {
        DensitySpec {
            kind: DensityKind::Uniform,
            label: "uniform".into(),
            bounds: (1.0, 1.0),
        }
    }

    /// `(p + 1) t^p` for `p > -1`.
    pub fn power(exponent: f64) -> Result<Self> {
        if !(exponent.is_finite() && exponent > -1.0) {
            return Err(Error::InvalidDensity(format!(
                "power density needs exponent > -1, got {exponent}"
            )));
        }
        if exponent == 0.0 {
            return Ok(Self::uniform());
        }
        Self::validated(DensityKind::Power { exponent }, format!("power(p={exponent})"))
    }

    /// The optimal density `((λ + 2) / 3) t^((λ - 1) / 3)` for a jump function
    /// proportional to `t^(λ - 1)` and a uniform weight.
    pub fn optimal_power(lambda: f64) -> Result<Self> {
        Self::power((lambda - 1.0) / 3.0)
    }

    /// A density given by an already normalized function.
    pub fn from_pdf(pdf: impl Fn(f64) -> f64 + Send + Sync + 'static, label: &str) -> Result<Self> {
        let pdf: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(pdf);
        let mass = unit_integral(|t| pdf(t));
        if !mass.is_finite() || (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDensity(format!(
                "`{label}` integrates to {mass}, expected 1"
            )));
        }
        Self::validated(DensityKind::General { pdf, norm: 1.0 }, label.to_string())
    }

    /// The density proportional to a positive function.
    pub fn normalize(f: impl Fn(f64) -> f64 + Send + Sync + 'static, label: &str) -> Result<Self> {
        let pdf: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(f);
        let norm = unit_integral(|t| pdf(t));
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::InvalidDensity(format!(
                "normalizing integral of `{label}` is {norm}"
            )));
        }
        Self::validated(DensityKind::General { pdf, norm }, label.to_string())
    }

    fn validated(kind: DensityKind, label: String) -> Result<Self> {
        let mut spec = DensitySpec {
            kind,
            label,
            bounds: (0.0, 0.0),
        };
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..VALIDATION_GRID {
            let t = (i as f64 + 0.5) / VALIDATION_GRID as f64;
            let v = spec.eval(t);
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidDensity(format!(
                    "`{}` is not positive and finite at t = {t} (value {v})",
                    spec.label
                )));
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
        spec.bounds = (lo, hi);
        Ok(spec)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `(inf f, sup f)` over the validation grid.
    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, DensityKind::Uniform)
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            DensityKind::Uniform => 1.0,
            DensityKind::Power { exponent } => (exponent + 1.0) * t.powf(*exponent),
            DensityKind::General { pdf, norm } => pdf(t) / norm,
        }
    }

    /// `F(t) = ∫₀ᵗ f`.
    pub fn cdf(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match &self.kind {
            DensityKind::Uniform => t,
            DensityKind::Power { exponent } => t.powf(exponent + 1.0),
            DensityKind::General { pdf, norm } => tanh_sinh(|s| pdf(s), 0.0, t) / norm,
        }
    }

    /// `F⁻¹(p)`; bisection when there is no closed form.
    pub fn cdf_inverse(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match &self.kind {
            DensityKind::Uniform => p,
            DensityKind::Power { exponent } => p.powf(1.0 / (exponent + 1.0)),
            DensityKind::General { .. } => {
                if p == 1.0 {
                    return 1.0;
                }
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                while hi - lo > 1e-15 {
                    let mid = 0.5 * (lo + hi);
                    let v = self.cdf(mid);
                    if (v - p).abs() <= INVERSION_TOL {
                        return mid;
                    }
                    if v < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }
}

/// Weight density `w` over which pointwise risk is integrated.
#[derive(Clone, Default)]
pub enum WeightDensity {
    #[default]
    Uniform,
    General(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl WeightDensity {
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            WeightDensity::Uniform => 1.0,
            WeightDensity::General(f) => f(t),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            WeightDensity::Uniform => "uniform",
            WeightDensity::General(_) => "general",
        }
    }
}

impl fmt::Debug for WeightDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// `t_i = F⁻¹(i / n)` for `i = 1..=n`.
pub fn regular_design(f: &DensitySpec, n: usize) -> Result<Design> {
    if n < 2 {
        return Err(Error::param("n", format!("regular design needs n >= 2, got {n}")));
    }
    let nf = n as f64;
    let points: Vec<f64> = (1..=n).map(|i| f.cdf_inverse(i as f64 / nf)).collect();
    let provenance = match &f.kind {
        DensityKind::Uniform => Provenance::Uniform,
        DensityKind::Power { exponent } => Provenance::OptimalPower {
            lambda: 3.0 * exponent + 1.0,
        },
        DensityKind::General { .. } => Provenance::RegularFromDensity {
            density: f.label.clone(),
        },
    };
    Design::with_provenance(points, provenance)
        .map_err(|e| Error::InvalidDensity(format!("`{}` produced an invalid design: {e}", f.label)))
}

/// `t_i = (i - 0.5) / n`.
pub fn midpoint_design(n: usize) -> Result<Design> {
    if n < 1 {
        return Err(Error::param("n", "midpoint design needs n >= 1"));
    }
    let nf = n as f64;
    let points = (1..=n).map(|i| (i as f64 - 0.5) / nf).collect();
    Design::with_provenance(points, Provenance::Midpoint)
}

/// The density proportional to `(α w)^(1/3)`.
///
/// A power-law `α` with uniform `w` gives the closed form
/// `(p/3 + 1) t^(p/3)`; anything else is normalized by quadrature.
pub fn optimal_design_density(alpha: &JumpProfile, w: &WeightDensity) -> Result<DensitySpec> {
    match (alpha, w) {
        (JumpProfile::Power { scale, exponent }, WeightDensity::Uniform) => {
            if !(*scale > 0.0) {
                return Err(Error::InvalidDensity(format!(
                    "jump function scale must be positive, got {scale}"
                )));
            }
            DensitySpec::power(exponent / 3.0)
        }
        _ => {
            let alpha = alpha.clone();
            let w = w.clone();
            DensitySpec::normalize(
                move |t| (alpha.eval(t) * w.eval(t)).cbrt(),
                "optimal((alpha*w)^(1/3))",
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn uniform_regular_design_is_exact() {
        let d = regular_design(&DensitySpec::uniform(), 4).unwrap();
        assert_eq!(d.points(), &[0.25, 0.5, 0.75, 1.0]);
        for n in [2, 7, 100] {
            let d = regular_design(&DensitySpec::uniform(), n).unwrap();
            for (i, t) in d.points().iter().enumerate() {
                assert_eq!(*t, (i + 1) as f64 / n as f64);
            }
        }
    }

    #[test]
    fn optimal_power_design() {
        let f = DensitySpec::optimal_power(4.0).unwrap();
        let d = regular_design(&f, 4).unwrap();
        let expect = [0.5, 0.5f64.sqrt(), 0.75f64.sqrt(), 1.0];
        for (a, b) in d.points().iter().zip(expect) {
            assert_relative_eq!(*a, b, max_relative = 1e-15);
        }
        assert_eq!(d.provenance(), &Provenance::OptimalPower { lambda: 4.0 });
    }

    #[test]
    fn two_point_designs_end_at_one() {
        let f = DensitySpec::normalize(|t| 1.0 + t, "1+t").unwrap();
        let d = regular_design(&f, 2).unwrap();
        assert!(d.points()[0] < d.points()[1]);
        assert_eq!(d.points()[1], 1.0);
        assert!(regular_design(&f, 1).is_err());
    }

    #[test]
    fn numeric_inversion_hits_the_quantiles() {
        let f = DensitySpec::normalize(|t| (3.0 * t).sin() + 1.2, "sin").unwrap();
        let n = 17;
        let d = regular_design(&f, n).unwrap();
        for (i, t) in d.points().iter().enumerate() {
            assert!((f.cdf(*t) - (i + 1) as f64 / n as f64).abs() <= 1e-10);
        }
    }

    #[test]
    fn invalid_densities_rejected() {
        assert!(DensitySpec::from_pdf(|_| 2.0, "two").is_err());
        assert!(DensitySpec::normalize(|t| t - 0.5, "signed").is_err());
        assert!(DensitySpec::power(-1.5).is_err());
    }

    #[test]
    fn midpoint_reference_values() {
        assert_eq!(midpoint_design(2).unwrap().points(), &[0.25, 0.75]);
        assert_eq!(
            midpoint_design(4).unwrap().points(),
            &[0.125, 0.375, 0.625, 0.875]
        );
        let d = midpoint_design(100).unwrap();
        assert_eq!(d.points()[0], 0.005);
        assert_eq!(d.points()[99], 0.995);
    }

    #[test]
    fn optimal_density_reference_cases() {
        let c = optimal_design_density(&JumpProfile::constant(3.0), &WeightDensity::Uniform).unwrap();
        assert!(c.is_uniform());
        let gou = JumpProfile::Power {
            scale: 0.7,
            exponent: 3.0,
        };
        let f = optimal_design_density(&gou, &WeightDensity::Uniform).unwrap();
        for t in [0.1, 0.5, 0.9] {
            assert_relative_eq!(f.eval(t), 2.0 * t, max_relative = 1e-14);
        }
        let sw = JumpProfile::Power {
            scale: 1.0,
            exponent: 2.0,
        };
        let f = optimal_design_density(&sw, &WeightDensity::Uniform).unwrap();
        for t in [0.1, 0.5, 0.9] {
            assert_relative_eq!(f.eval(t), 5.0 / 3.0 * t.powf(2.0 / 3.0), max_relative = 1e-14);
        }
    }

    #[test]
    fn general_optimal_density_matches_closed_form() {
        let alpha = JumpProfile::General(Arc::new(|t: f64| 0.3 * t * t));
        let f = optimal_design_density(&alpha, &WeightDensity::Uniform).unwrap();
        for t in [0.05, 0.3, 0.8] {
            assert_relative_eq!(f.eval(t), 5.0 / 3.0 * t.powf(2.0 / 3.0), max_relative = 1e-10);
        }
        assert_relative_eq!(unit_integral(|t| f.eval(t)), 1.0, max_relative = 1e-8);
    }

    #[test]
    fn window_reference_values() {
        let d = midpoint_design(4).unwrap();
        let w = window_points(&d, 0.5, 0.2);
        assert_eq!((w.start, w.end, w.count()), (1, 3, 2));
        assert_eq!(window_points(&d, 0.5, 0.99).count(), 4);
        // i/100 for i = 40..=60
        let u = regular_design(&DensitySpec::uniform(), 100).unwrap();
        assert_eq!(window_points(&u, 0.5, 0.1).count(), 21);
        // (i - 0.5)/100 for i = 41..=60
        let m = midpoint_design(100).unwrap();
        let w = window_points(&m, 0.5, 0.1);
        assert_eq!(w.count(), 20);
        assert_eq!(m.points()[w.start], 0.405);
        assert!(window_points(&m, 0.5, 0.001).is_empty());
    }

    #[test]
    fn spacing_obeys_density_bound() {
        for f in [
            DensitySpec::uniform(),
            DensitySpec::normalize(|t| 0.5 + t, "lin").unwrap(),
        ] {
            let n = 50;
            let d = regular_design(&f, n).unwrap();
            let (inf, _) = f.bounds();
            assert!(d.max_spacing() <= 2.0 / inf / n as f64);
        }
    }

    proptest! {
        #[test]
        fn window_count_bound(x in 0.01f64..0.99, h in 0.02f64..0.5, n in 10usize..300) {
            prop_assume!(n as f64 * h >= 1.0);
            for f in [DensitySpec::uniform(), DensitySpec::optimal_power(4.0).unwrap()] {
                let d = regular_design(&f, n).unwrap();
                let (_, sup) = f.bounds();
                let count = window_points(&d, x, h).count() as f64;
                prop_assert!(count <= 2.0 * sup * n as f64 * h + 1.0 + 1e-9);
            }
        }

        #[test]
        fn optimal_density_is_scale_invariant(
            a in 0.1f64..10.0, c in 0.1f64..10.0, p in 0.0f64..4.0, t in 0.01f64..1.0
        ) {
            let base = JumpProfile::General(Arc::new(move |s: f64| s.powf(p) + 0.1));
            let scaled = JumpProfile::General(Arc::new(move |s: f64| a * (s.powf(p) + 0.1)));
            let w = WeightDensity::General(Arc::new(move |s: f64| c * (1.0 + s)));
            let f1 = optimal_design_density(&base, &WeightDensity::General(Arc::new(|s: f64| 1.0 + s))).unwrap();
            let f2 = optimal_design_density(&scaled, &w).unwrap();
            prop_assert!((f1.eval(t) - f2.eval(t)).abs() <= 1e-10 * f1.eval(t).max(1.0));
        }
    }
}
