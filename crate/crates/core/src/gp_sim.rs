//! Gaussian error-process simulation and replicate summaries.
//!
//! Replicate `j` draws its normals from a ChaCha stream keyed by `(seed, j)`,
//! so rows can be generated in parallel without changing the output.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{cov_matrix, CovModel};
use crate::design::Design;
use crate::error::{Error, Result};

/// Mean function of the regression model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum RegressionFunction {
    /// `10x³ - 15x⁴ + 6x⁵`.
    #[default]
    CubicGrowth,
    /// `Σ c_k x^k`, lowest degree first.
    Polynomial { coefficients: Vec<f64> },
}

impl RegressionFunction {
    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::param(
                "coefficients",
                "polynomial needs at least one finite coefficient",
            ));
        }
        Ok(RegressionFunction::Polynomial { coefficients })
    }

    pub fn constant(c: f64) -> Self {
        RegressionFunction::Polynomial {
            coefficients: vec![c],
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            RegressionFunction::CubicGrowth => x * x * x * (10.0 + x * (-15.0 + 6.0 * x)),
            RegressionFunction::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
        }
    }

    /// `g''(x)`.
    #[inline]
    pub fn second_derivative(&self, x: f64) -> f64 {
        match self {
            RegressionFunction::CubicGrowth => x * (60.0 + x * (-180.0 + 120.0 * x)),
            RegressionFunction::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .skip(2)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * x + (k * (k - 1)) as f64 * c),
        }
    }
}

/// `m` replicate observations on a common design.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub design: Design,
    /// `m × n`, one row per replicate.
    pub y: DMatrix<f64>,
    pub seed: u64,
    /// Absent for imported data.
    pub model: Option<CovModel>,
    pub g: Option<RegressionFunction>,
}

impl SampleSet {
    pub fn from_observations(design: Design, y: DMatrix<f64>) -> Result<Self> {
        if y.ncols() != design.n() {
            return Err(Error::param(
                "y",
                format!("{} columns for a design of {} points", y.ncols(), design.n()),
            ));
        }
        if y.nrows() == 0 {
            return Err(Error::InsufficientReplicates(0));
        }
        Ok(SampleSet {
            design,
            y,
            seed: 0,
            model: None,
            g: None,
        })
    }

    pub fn m(&self) -> usize {
        self.y.nrows()
    }

    pub fn n(&self) -> usize {
        self.y.ncols()
    }

    /// Writes a header of design points followed by one row per replicate.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.design.points().iter().map(|t| format!("{t:e}")))?;
        for row in self.y.row_iter() {
            out.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(r);
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("invalid {what} `{s}`")))
        };
        let points = rdr
            .headers()?
            .iter()
            .map(|s| parse(s, "design point"))
            .collect::<Result<Vec<_>>>()?;
        let design = Design::from_points(points)?;
        let n = design.n();
        let mut data = Vec::new();
        let mut m = 0;
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != n {
                return Err(Error::Parse(format!(
                    "replicate {} has {} values, expected {n}",
                    m + 1,
                    rec.len()
                )));
            }
            for s in rec.iter() {
                let v = parse(s, "observation")?;
                if !v.is_finite() {
                    return Err(Error::Parse(format!("non-finite observation `{s}`")));
                }
                data.push(v);
            }
            m += 1;
        }
        if m == 0 {
            return Err(Error::InsufficientReplicates(0));
        }
        let y = DMatrix::from_row_slice(m, n, &data);
        Self::from_observations(design, y)
    }
}

/// A factored error model on a fixed design, ready to draw replicates.
#[derive(Debug, Clone)]
pub struct Simulator {
    design: Design,
    model: CovModel,
    g: RegressionFunction,
    factor: DMatrix<f64>,
    mean: Vec<f64>,
}

impl Simulator {
    pub fn new(model: &CovModel, d: &Design, g: &RegressionFunction) -> Result<Self> {
        model.validate()?;
        let factor = cov_matrix(model, d)?.cholesky_lower()?;
        let mean = d.points().iter().map(|&t| g.eval(t)).collect();
        Ok(Simulator {
            design: d.clone(),
            model: *model,
            g: g.clone(),
            factor,
            mean,
        })
    }

    /// `m` replicates; row `j` uses ChaCha stream `j` under `seed`.
    pub fn sample(&self, m: usize, seed: u64) -> Result<SampleSet> {
        if m < 1 {
            return Err(Error::param("m", "need at least one replicate"));
        }
        let n = self.design.n();
        let rows: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|j| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(j as u64);
                let z = DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(&mut rng)));
                let e = &self.factor * z;
                self.mean.iter().zip(e.iter()).map(|(a, b)| a + b).collect()
            })
            .collect();
        let y = DMatrix::from_fn(m, n, |j, i| rows[j][i]);
        Ok(SampleSet {
            design: self.design.clone(),
            y,
            seed,
            model: Some(self.model),
            g: Some(self.g.clone()),
        })
    }
}

/// Draws `m` paths `g(t) + L z` with `L` the Cholesky factor of the design
/// covariance.
pub fn simulate(
    model: &CovModel,
    d: &Design,
    g: &RegressionFunction,
    m: usize,
    seed: u64,
) -> Result<SampleSet> {
    if m < 1 {
        return Err(Error::param("m", "need at least one replicate"));
    }
    Simulator::new(model, d, g)?.sample(m, seed)
}

/// Seed for the `index`-th independent experiment under a master seed
/// (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Column means of the observations.
pub fn ybar(s: &SampleSet) -> Vec<f64> {
    let m = s.m() as f64;
    s.y.column_iter().map(|c| c.sum() / m).collect()
}
