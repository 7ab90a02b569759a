//! Synthetic-data experiments: risk and evidence as functions of model complexity.
//!
//! Every random quantity comes from a ChaCha8 stream whose seed is derived
//! from the master seed with [`derive_seed`](crate::rng::derive_seed) and a
//! fixed tag, so results do not depend on thread scheduling:
//!
//! | stream | seed |
//! |---|---|
//! | dataset noise | `derive_seed(seed, [NOISE])` |
//! | seed-drawn coefficients | `derive_seed(seed, [COEFFICIENTS])` |
//! | random inputs | `derive_seed(seed, [INPUTS])` |
//! | replicate `r` of a sweep | `derive_seed(master, [REPLICATE, r])` |
//! | random features of a sweep | `derive_seed(master, [FEATURES])` |

mod estimators;
mod sweep;

pub use estimators::{Bayes, Estimator, EstimatorKind, FitProblem, MinNorm, Ridge};
pub use sweep::{
    complexity_design, double_descent_sweep, evidence_sweep, frequentist_risk, paired_median_difference_bound,
    EvidenceOptions, EvidencePoint, RiskCurvePoint, RiskEstimate, SweepConfig,
};

use serde::{Deserialize, Serialize};

use crate::basis::{legendre_design, Interval};
use crate::rng::{derive_seed, standard_normal, standard_normals, stream, uniform};
use crate::{Error, Result};

pub const TAG_NOISE: u64 = 1;
pub const TAG_COEFFICIENTS: u64 = 2;
pub const TAG_INPUTS: u64 = 3;
pub const TAG_REPLICATE: u64 = 4;
pub const TAG_FEATURES: u64 = 5;

/// Coefficients of the true Legendre expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Coefficients {
    Explicit { values: Vec<f64> },
    /// i.i.d. `N(0, scale²)`; without a seed the dataset seed is used.
    SeedDrawn {
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum XDesign {
    Equispaced,
    /// i.i.d. uniform on the domain; without a seed the dataset seed is used.
    UniformRandom {
        #[serde(default)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub n: usize,
    pub noise_sd: f64,
    pub true_degree: usize,
    pub coefficients: Coefficients,
    pub x_design: XDesign,
    pub domain: Interval,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            n: 20,
            noise_sd: 0.3,
            true_degree: 10,
            coefficients: Coefficients::SeedDrawn { seed: None, scale: 1.0 },
            x_design: XDesign::Equispaced,
            domain: Interval::symmetric_unit(),
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!("N must be at least 2, got {}", self.n)));
        }
        if !(self.noise_sd > 0.0) || !self.noise_sd.is_finite() {
            return Err(Error::InvalidArgument(format!("noise_sd must be positive, got {}", self.noise_sd)));
        }
        Interval::new(self.domain.low, self.domain.high)?;
        match &self.coefficients {
            Coefficients::Explicit { values } => {
                if values.len() != self.true_degree + 1 {
                    return Err(Error::DimensionMismatch(format!(
                        "{} explicit coefficients for true degree {}",
                        values.len(),
                        self.true_degree
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("true coefficient".into()));
                }
            }
            Coefficients::SeedDrawn { scale, .. } => {
                if !(*scale >= 0.0) || !scale.is_finite() {
                    return Err(Error::InvalidArgument(format!("coefficient scale must be nonnegative, got {scale}")));
                }
            }
        }
        Ok(())
    }

    /// Copy with seed-drawn coefficients and random inputs fixed, using `seed`
    /// where no explicit seed was given.
    pub fn resolved(&self, seed: u64) -> Result<Self> {
        self.validate()?;
        let values = self.true_coefficients(seed);
        let x = self.inputs(seed);
        let mut out = self.clone();
        out.coefficients = Coefficients::Explicit { values };
        if let XDesign::UniformRandom { seed: s } = self.x_design {
            out.x_design = XDesign::UniformRandom {
                seed: Some(s.unwrap_or_else(|| derive_seed(seed, &[TAG_INPUTS]))),
            };
            debug_assert_eq!(out.inputs(0), x);
        }
        Ok(out)
    }

    pub fn true_coefficients(&self, seed: u64) -> Vec<f64> {
        match &self.coefficients {
            Coefficients::Explicit { values } => values.clone(),
            Coefficients::SeedDrawn { seed: s, scale } => {
                let mut r = stream(s.unwrap_or_else(|| derive_seed(seed, &[TAG_COEFFICIENTS])));
                (0..=self.true_degree).map(|_| scale * standard_normal(&mut r)).collect()
            }
        }
    }

    pub fn inputs(&self, seed: u64) -> Vec<f64> {
        match self.x_design {
            XDesign::Equispaced => self.domain.linspace(self.n),
            XDesign::UniformRandom { seed: s } => {
                let mut r = stream(s.unwrap_or_else(|| derive_seed(seed, &[TAG_INPUTS])));
                (0..self.n)
                    .map(|_| uniform(&mut r, self.domain.low, self.domain.high))
                    .collect()
            }
        }
    }

    /// `f_true` at `points`.
    pub fn f_true(&self, coefficients: &[f64], points: &[f64]) -> Result<Vec<f64>> {
        legendre_design(points, self.true_degree, self.domain)?
            .matrix()
            .matvec(coefficients)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub f_true_at_x: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub spec: GeneratorSpec,
    pub seed: u64,
}

pub fn generate(spec: &GeneratorSpec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let x = spec.inputs(seed);
    let coefficients = spec.true_coefficients(seed);
    let f_true_at_x = spec.f_true(&coefficients, &x)?;
    let noise = standard_normals(&mut stream(derive_seed(seed, &[TAG_NOISE])), spec.n);
    let y = f_true_at_x
        .iter()
        .zip(&noise)
        .map(|(f, e)| f + spec.noise_sd * e)
        .collect();
    Ok(Dataset {
        x,
        y,
        f_true_at_x,
        coefficients,
        spec: spec.clone(),
        seed,
    })
}

/// `(1/n) Σ (y_i − ŷ_i)²`.
pub fn train_error(dataset: &Dataset, predictions: &[f64]) -> Result<f64> {
    mean_squared_difference(&dataset.y, predictions)
}

pub(crate) fn mean_squared_difference(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("{} targets and {} predictions", a.len(), b.len())));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>() / a.len() as f64)
}
