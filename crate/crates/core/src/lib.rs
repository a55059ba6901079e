//! Kernel regression with replicated, correlated observations.
//!
//! Observations follow `Y_j(tᵢ) = g(tᵢ) + ε_j(tᵢ)` for `m` independent
//! replicates of a centered Gaussian error process with covariance `R`. The
//! crate provides the trapezoidal and Gasser-Müller kernel estimators, their
//! exact and asymptotic integrated mean squared error, IMSE-optimal
//! bandwidths and sampling designs, error-process simulation, and
//! least-squares covariance fitting.
//!
//! ```
//! use correg::prelude::*;
//!
//! let design = midpoint_design(20)?;
//! let smoother = Smoother::new(EstimatorKind::GasserMuller, Kernel::quadratic(), DensitySpec::uniform());
//! let setup = RiskSetup::new(design, smoother, RegressionFunction::CubicGrowth, CovModel::Wiener { sigma2: 1.0 }, 5)?;
//! let report = exact_imse(&setup, 0.411)?;
//! assert!((report.imse - 0.0878).abs() < 0.005);
//! # Ok::<(), correg::Error>(())
//! ```

// `!(x > 0.0)` and friends are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covariance;
pub mod covfit;
pub mod design;
pub mod error;
pub mod estimators;
pub mod gp_sim;
pub mod kernels;
pub mod quad;
pub mod reference;
pub mod risk;

pub use error::{Error, Result};

/// The types and functions most experiments need.
pub mod prelude {
    pub use crate::covariance::{cov_matrix, CovMatrix, CovModel, JumpProfile};
    pub use crate::covfit::{
        anneal_fit, anneal_fit_cov, empirical_cov, median_fit, plugin_design_experiment, q_criterion,
        AnnealSchedule, FitResult, ParamBox, PluginExperiment, ReductionReport,
    };
    pub use crate::design::{
        midpoint_design, optimal_design_density, regular_design, window_points, DensitySpec, Design,
        WeightDensity,
    };
    pub use crate::error::{Error, Result};
    pub use crate::estimators::{
        boundary_correct, estimate_curve, gm_weights, trap_weights, BoundaryMode, EstimatorKind, Smoother,
        WeightVector,
    };
    pub use crate::gp_sim::{simulate, ybar, RegressionFunction, SampleSet, Simulator};
    pub use crate::kernels::{Kernel, KernelFamily};
    pub use crate::risk::{
        asymptotic_imse, asymptotic_optimal_bandwidth, asymptotic_rimse, exact_imse, minimax_psi,
        normality_check, optimal_bandwidth_grid, BandwidthGrid, EmptyWindowPolicy, RiskReport, RiskSetup,
        XGrid,
    };
}
