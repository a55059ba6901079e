//! The subcommands. Each returns the bytes of its output file together with
//! a short summary for standard error.

use std::fmt::Write as _;
use std::result::Result;

use correg::covfit::{empirical_cov, median_fit, write_fit_csv, PluginExperiment};
use correg::gp_sim::derive_seed;
use correg::prelude::*;
use correg::reference::{reduction_table, risk_table, REDUCTION_BANDWIDTH, REDUCTION_MODEL};
use correg::risk::write_risk_csv;
use rayon::prelude::*;

use crate::config::{Bandwidth, ExperimentConfig};
use crate::error::CliError;

pub struct Output {
    pub data: Vec<u8>,
    pub summary: String,
}

fn bandwidth_values(cfg: &ExperimentConfig) -> Result<Vec<f64>, CliError> {
    Ok(match &cfg.bandwidth {
        Bandwidth::Value(h) => vec![*h],
        Bandwidth::Grid(g) => g.values()?,
    })
}

fn grid_of(cfg: &ExperimentConfig) -> BandwidthGrid {
    match &cfg.bandwidth {
        Bandwidth::Value(h) => BandwidthGrid::List { values: vec![*h] },
        Bandwidth::Grid(g) => g.clone(),
    }
}

/// Mean of `replications` simulated estimator curves next to `g`.
///
/// A bandwidth grid is first reduced to its exact-IMSE minimizer.
pub fn estimate(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let h = match &cfg.bandwidth {
        Bandwidth::Value(h) => *h,
        Bandwidth::Grid(g) => optimal_bandwidth_grid(&cfg.risk_setup()?, g)?.h_opt(),
    };
    let design = cfg.design()?;
    let smoother = cfg.smoother()?;
    let sim = Simulator::new(&cfg.covariance, &design, &cfg.g)?;
    let k = cfg.curve_points;
    let grid: Vec<f64> = (1..=k).map(|i| i as f64 / (k + 1) as f64).collect();
    let curves = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| {
            let s = sim.sample(cfg.m, derive_seed(cfg.seed, r))?;
            estimate_curve(&s, &grid, h, &smoother)
        })
        .collect::<correg::Result<Vec<_>>>()?;
    let mut out = String::from("x,mean_ghat,g\n");
    let mut worst: f64 = 0.0;
    for (i, x) in grid.iter().enumerate() {
        let mut sum = 0.0;
        let mut missing = false;
        for c in &curves {
            match c[i].ghat {
                Some(v) => sum += v,
                None => missing = true,
            }
        }
        let g = cfg.g.eval(*x);
        if missing {
            writeln!(out, "{x},NA,{g}").unwrap();
        } else {
            let mean = sum / curves.len() as f64;
            worst = worst.max((mean - g).abs());
            writeln!(out, "{x},{mean},{g}").unwrap();
        }
    }
    Ok(Output {
        data: out.into_bytes(),
        summary: format!(
            "{} curves, {} {}, n = {}, m = {}, h = {h}: max |mean - g| = {worst:.4e}",
            cfg.replications, cfg.estimator, cfg.covariance, cfg.n, cfg.m
        ),
    })
}

/// Exact `Ibias²`, `Ivar` and IMSE at each configured bandwidth.
pub fn risk(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let setup = cfg.risk_setup()?;
    let reports = bandwidth_values(cfg)?
        .par_iter()
        .map(|&h| exact_imse(&setup, h))
        .collect::<correg::Result<Vec<_>>>()?;
    let mut data = Vec::new();
    write_risk_csv(&reports, None, &mut data)?;
    Ok(Output {
        data,
        summary: format!("{} bandwidth(s) evaluated", reports.len()),
    })
}

/// Exact-IMSE grid search, with the asymptotic optimum for comparison.
pub fn bandwidth_search(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let setup = cfg.risk_setup()?;
    let search = optimal_bandwidth_grid(&setup, &grid_of(cfg))?;
    let mut data = Vec::new();
    write_risk_csv(&search.reports, Some(search.h_opt()), &mut data)?;
    let best = search.best_report();
    let mut summary = format!("h_opt = {} with IMSE = {:.6e}", search.h_opt(), best.imse);
    let k = cfg.kernel()?;
    match asymptotic_optimal_bandwidth(&cfg.covariance, &k, &cfg.g, &cfg.weight_density(), cfg.m) {
        Ok(h) => write!(summary, "; asymptotic h* = {h:.4}").unwrap(),
        Err(e) => write!(summary, "; no asymptotic h* ({e})").unwrap(),
    }
    Ok(Output { data, summary })
}

/// Asymptotically optimal bandwidth, design density and design points.
pub fn optimal(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let k = cfg.kernel()?;
    let w = cfg.weight_density();
    let alpha = cfg.covariance.jump_profile()?;
    let h = asymptotic_optimal_bandwidth(&cfg.covariance, &k, &cfg.g, &w, cfg.m)?;
    let f = optimal_design_density(&alpha, &w)?;
    let rimse = asymptotic_rimse(&alpha, &w);
    let design = regular_design(&f, cfg.n)?;
    let mut out = String::new();
    writeln!(out, "# covariance = {}", cfg.covariance).unwrap();
    writeln!(out, "# weight = {}", w.label()).unwrap();
    writeln!(out, "# h* = {h}").unwrap();
    writeln!(out, "# f* = {}", f.label()).unwrap();
    writeln!(out, "# rIMSE = {rimse}").unwrap();
    writeln!(out, "i,t").unwrap();
    for (i, t) in design.points().iter().enumerate() {
        writeln!(out, "{},{t}", i + 1).unwrap();
    }
    Ok(Output {
        data: out.into_bytes(),
        summary: format!("h* = {h:.4}, f* = {}, rIMSE = {:.2}%", f.label(), 100.0 * rimse),
    })
}

/// Generalized OU fits to one data set from `fit.fits` annealing seeds.
///
/// The data come from `fit.data` when set, otherwise they are simulated
/// from the configured covariance.
pub fn fit_cov(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let s = match &cfg.fit.data {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            SampleSet::read_csv(std::io::BufReader::new(file))?
        }
        None => simulate(&cfg.covariance, &cfg.design()?, &cfg.g, cfg.m, cfg.seed)?,
    };
    let rhat = empirical_cov(&s)?;
    let fits = (0..cfg.fit.fits as u64)
        .into_par_iter()
        .map(|r| {
            anneal_fit_cov(
                &rhat,
                &s.design,
                &cfg.fit.bounds,
                &cfg.fit.schedule,
                derive_seed(cfg.seed, r),
            )
        })
        .collect::<correg::Result<Vec<_>>>()?;
    let med = median_fit(&fits, &rhat, &s.design)?;
    let mut data = Vec::new();
    write_fit_csv(&fits, &mut data)?;
    Ok(Output {
        data,
        summary: format!(
            "median of {} fits: sigma2 = {:.4}, lambda = {:.4}, rho = {:.4}, Q = {:.3e}",
            fits.len(),
            med.sigma2_hat,
            med.lambda_hat,
            med.rho_hat,
            med.q_value
        ),
    })
}

fn rel_dev(ours: f64, published: f64) -> f64 {
    (ours - published) / published
}

/// Regenerates table `id` (1 to 10) next to its published values.
///
/// Risk tables search the grid the published bandwidths come from and also
/// report the minimizer on the default 0.001 grid. Reduction tables take
/// their fit settings and seed from the config.
pub fn repro_table(cfg: &ExperimentConfig, id: u8) -> Result<Output, CliError> {
    if let Some(table) = risk_table(id) {
        let mut out = String::from(
            "table,estimator,m,Ibias2,Ivar,IMSE,h_opt,published_Ibias2,published_Ivar,published_IMSE,published_h_opt,rel_dev_IMSE,fine_h_opt,fine_IMSE\n",
        );
        let rows = table
            .rows
            .par_iter()
            .map(|row| {
                let smoother = Smoother::new(row.estimator, Kernel::quadratic(), DensitySpec::uniform());
                let setup = RiskSetup::new(
                    midpoint_design(table.n)?,
                    smoother,
                    RegressionFunction::CubicGrowth,
                    table.model,
                    row.m,
                )?;
                let coarse = optimal_bandwidth_grid(&setup, &table.grid)?;
                let fine = optimal_bandwidth_grid(&setup, &BandwidthGrid::default())?;
                Ok((row, coarse, fine))
            })
            .collect::<correg::Result<Vec<_>>>()?;
        let mut worst: f64 = 0.0;
        for (row, coarse, fine) in rows {
            let b = coarse.best_report();
            let dev = rel_dev(b.imse, row.imse);
            worst = worst.max(dev.abs());
            writeln!(
                out,
                "{id},{},{},{:.6e},{:.6e},{:.6e},{},{:e},{:e},{:e},{},{:.4},{},{:.6e}",
                row.estimator,
                row.m,
                b.ibias2,
                b.ivar,
                b.imse,
                coarse.h_opt(),
                row.ibias2,
                row.ivar,
                row.imse,
                row.h_opt,
                dev,
                fine.h_opt(),
                fine.best_report().imse
            )
            .unwrap();
        }
        return Ok(Output {
            data: out.into_bytes(),
            summary: format!(
                "table {id} ({}): largest IMSE deviation {:.1}%",
                table.model,
                100.0 * worst
            ),
        });
    }
    if let Some(table) = reduction_table(id) {
        let mut out = String::from(
            "m,IMSE_unif,IMSE_opt,rIMSE_lambda_pct,IMSE_opt_hat,rIMSE_lambda_hat_pct,lambda_hat,\
             published_IMSE_unif,published_IMSE_opt,published_rIMSE_lambda_pct,published_IMSE_opt_hat,published_rIMSE_lambda_hat_pct,published_lambda_hat,\
             dev_rIMSE_lambda_points\n",
        );
        let mut summary = format!("table {id} (n = {}):", table.n);
        for row in &table.rows {
            let mut e = PluginExperiment::new(
                table.n,
                row.m,
                REDUCTION_MODEL,
                REDUCTION_BANDWIDTH,
                derive_seed(cfg.seed, row.m as u64),
            );
            e.fits = cfg.fit.fits;
            e.bounds = cfg.fit.bounds;
            e.schedule = cfg.fit.schedule;
            let r = plugin_design_experiment(&e)?;
            let dev = 100.0 * (r.rimse_lambda - row.rimse_lambda);
            writeln!(
                out,
                "{},{:.6e},{:.6e},{:.4},{:.6e},{:.4},{:.4},{},{},{:.2},{},{:.2},{},{:.2}",
                row.m,
                r.imse_unif,
                r.imse_opt,
                100.0 * r.rimse_lambda,
                r.imse_opt_hat,
                100.0 * r.rimse_lambda_hat,
                r.fit.lambda_hat,
                row.imse_unif,
                row.imse_opt,
                100.0 * row.rimse_lambda,
                row.imse_opt_hat,
                100.0 * row.rimse_lambda_hat,
                row.lambda_hat,
                dev
            )
            .unwrap();
            write!(
                summary,
                " m={} rIMSE {:.2}% (published {:.2}%);",
                row.m,
                100.0 * r.rimse_lambda,
                100.0 * row.rimse_lambda
            )
            .unwrap();
        }
        return Ok(Output {
            data: out.into_bytes(),
            summary,
        });
    }
    Err(CliError::Config(format!(
        "--table must be between 1 and 10, got {id}"
    )))
}
