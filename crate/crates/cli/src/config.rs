//! JSON experiment configuration.
//!
//! Every field has a default, so `{}` is a valid config: the cubic growth
//! model observed with Wiener errors on the `n = 20` midpoint design, five
//! replicates, Gasser-Müller with the quadratic kernel.

use std::path::PathBuf;
use std::result::Result;
use std::sync::Arc;

use correg::covfit::{AnnealSchedule, ParamBox};
use correg::prelude::*;
use correg::risk::EmptyWindowPolicy;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// How the sampling design is generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DesignSpec {
    /// `(i - 0.5) / n`.
    Midpoint,
    /// `i / n`.
    Uniform,
    /// Regular design of the density `(p + 1) t^p`.
    Power { exponent: f64 },
    /// `(i / n)^(3 / (λ + 2))`, optimal for a generalized OU process with
    /// the given `λ`.
    OptimalPower { lambda: f64 },
    /// Regular design of the density proportional to `(α w)^(1/3)` for the
    /// configured covariance and weight.
    Optimal,
    /// Points in `(0, 1]`, strictly increasing. The trapezoidal estimator
    /// treats them as uniform.
    Explicit { points: Vec<f64> },
}

/// Weight density of the risk integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSpec {
    Uniform,
    /// `(p + 1) t^p`.
    Power {
        exponent: f64,
    },
}

/// A single bandwidth or a grid to search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bandwidth {
    Value(f64),
    Grid(BandwidthGrid),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Independent fits whose median is reported.
    pub fits: usize,
    pub bounds: ParamBox,
    pub schedule: AnnealSchedule,
    /// Replicate CSV to fit instead of simulated data.
    pub data: Option<PathBuf>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            fits: 100,
            bounds: ParamBox::default(),
            schedule: AnnealSchedule::default(),
            data: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub estimator: EstimatorKind,
    pub kernel: KernelFamily,
    pub covariance: CovModel,
    pub design: DesignSpec,
    pub g: RegressionFunction,
    pub n: usize,
    pub m: usize,
    pub bandwidth: Bandwidth,
    pub weight: WeightSpec,
    pub boundary: BoundaryMode,
    pub empty_window: EmptyWindowPolicy,
    /// Number of evaluation points in the risk integrals.
    pub x_grid: usize,
    /// Number of points at which `estimate` writes the curve.
    pub curve_points: usize,
    /// Simulated sample sets averaged by `estimate`.
    pub replications: usize,
    pub seed: u64,
    pub fit: FitConfig,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            estimator: EstimatorKind::GasserMuller,
            kernel: KernelFamily::Quadratic,
            covariance: CovModel::Wiener { sigma2: 1.0 },
            design: DesignSpec::Midpoint,
            g: RegressionFunction::CubicGrowth,
            n: 20,
            m: 5,
            bandwidth: Bandwidth::Grid(BandwidthGrid::default()),
            weight: WeightSpec::Uniform,
            boundary: BoundaryMode::RenormalizedTruncation,
            empty_window: EmptyWindowPolicy::Skip,
            x_grid: 201,
            curve_points: 199,
            replications: 100,
            seed: 1,
            fit: FitConfig::default(),
            out: None,
        }
    }
}

fn invalid(field: &str, msg: impl Into<String>) -> CliError {
    CliError::Config(format!("{field}: {}", msg.into()))
}

impl ExperimentConfig {
    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config always serializes")
    }

    /// Checks ranges and that every named family can be built.
    pub fn validate(&self) -> Result<(), CliError> {
        self.covariance
            .validate()
            .map_err(|e| invalid("covariance", e.to_string()))?;
        if self.n < 2 {
            return Err(invalid(
                "n",
                format!("need at least 2 design points, got {}", self.n),
            ));
        }
        if self.m < 1 {
            return Err(invalid("m", "need at least one replicate"));
        }
        match &self.bandwidth {
            Bandwidth::Value(h) => {
                if !(*h > 0.0 && *h < 1.0) {
                    return Err(invalid("bandwidth", format!("must lie in (0, 1), got {h}")));
                }
            }
            Bandwidth::Grid(g) => {
                let values = g.values().map_err(|e| invalid("bandwidth", e.to_string()))?;
                if let Some(h) = values.iter().find(|h| !(**h > 0.0 && **h < 1.0)) {
                    return Err(invalid("bandwidth", format!("grid value {h} is outside (0, 1)")));
                }
            }
        }
        if self.x_grid < 1 {
            return Err(invalid("x_grid", "need at least one evaluation point"));
        }
        if self.curve_points < 1 {
            return Err(invalid("curve_points", "need at least one point"));
        }
        if self.replications < 1 {
            return Err(invalid("replications", "need at least one replication"));
        }
        if self.fit.fits < 1 {
            return Err(invalid("fit.fits", "need at least one fit"));
        }
        self.fit
            .bounds
            .validate()
            .map_err(|e| invalid("fit.bounds", e.to_string()))?;
        self.fit
            .schedule
            .validate()
            .map_err(|e| invalid("fit.schedule", e.to_string()))?;
        if let WeightSpec::Power { exponent } = self.weight {
            if !(exponent.is_finite() && exponent > -1.0) {
                return Err(invalid(
                    "weight",
                    format!("power exponent must exceed -1, got {exponent}"),
                ));
            }
        }
        self.kernel().map_err(|e| invalid("kernel", e.to_string()))?;
        if let DesignSpec::Explicit { points } = &self.design {
            if points.len() != self.n {
                return Err(invalid(
                    "design",
                    format!("{} explicit points but n = {}", points.len(), self.n),
                ));
            }
        }
        if !matches!(self.design, DesignSpec::Optimal) {
            self.design().map_err(|e| invalid("design", e.to_string()))?;
        }
        Ok(())
    }

    pub fn kernel(&self) -> correg::Result<Kernel> {
        Kernel::from_family(&self.kernel)
    }

    pub fn weight_density(&self) -> WeightDensity {
        match self.weight {
            WeightSpec::Uniform => WeightDensity::Uniform,
            WeightSpec::Power { exponent } => {
                WeightDensity::General(Arc::new(move |t: f64| (exponent + 1.0) * t.powf(exponent)))
            }
        }
    }

    /// The design density the trapezoidal estimator divides by.
    pub fn density(&self) -> correg::Result<DensitySpec> {
        match &self.design {
            DesignSpec::Midpoint | DesignSpec::Uniform | DesignSpec::Explicit { .. } => {
                Ok(DensitySpec::uniform())
            }
            DesignSpec::Power { exponent } => DensitySpec::power(*exponent),
            DesignSpec::OptimalPower { lambda } => DensitySpec::optimal_power(*lambda),
            DesignSpec::Optimal => {
                let alpha = self.covariance.jump_profile()?;
                optimal_design_density(&alpha, &self.weight_density())
            }
        }
    }

    pub fn design(&self) -> correg::Result<Design> {
        match &self.design {
            DesignSpec::Midpoint => midpoint_design(self.n),
            DesignSpec::Explicit { points } => Design::from_points(points.clone()),
            _ => regular_design(&self.density()?, self.n),
        }
    }

    pub fn smoother(&self) -> correg::Result<Smoother> {
        Ok(Smoother::new(self.estimator, self.kernel()?, self.density()?).with_boundary(self.boundary))
    }

    pub fn risk_setup(&self) -> correg::Result<RiskSetup> {
        Ok(RiskSetup::new(
            self.design()?,
            self.smoother()?,
            self.g.clone(),
            self.covariance,
            self.m,
        )?
        .with_weight(self.weight_density())
        .with_x_grid(XGrid { points: self.x_grid })
        .with_policy(self.empty_window))
    }
}
