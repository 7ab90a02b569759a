use serde::{Deserialize, Serialize};

use crate::linmodel::{conjugate_posterior, ridge_weighted, PriorSchedule};
use crate::numerics::{min_norm_least_squares, Matrix, DEFAULT_PINV_TOL};
use crate::Result;

/// Everything an estimator sees for one replicate.
#[derive(Debug, Clone, Copy)]
pub struct FitProblem<'a> {
    pub train: &'a Matrix,
    pub test: &'a Matrix,
    pub y: &'a [f64],
    pub noise_variance: f64,
    /// Training inputs and noise-free targets on the test grid, for oracle stubs.
    pub x: &'a [f64],
    pub f_true_test: &'a [f64],
}

/// Produces predictions on the test grid from one training set.
pub trait Estimator: Sync {
    fn name(&self) -> String;

    fn predict(&self, problem: &FitProblem<'_>) -> Result<Vec<f64>>;
}

/// Minimum-norm least squares (the MLE when it is unique).
#[derive(Debug, Clone, Copy, Default)]
pub struct MinNorm;

impl Estimator for MinNorm {
    fn name(&self) -> String {
        "min_norm".into()
    }

    fn predict(&self, p: &FitProblem<'_>) -> Result<Vec<f64>> {
        let theta = min_norm_least_squares(p.train, p.y, DEFAULT_PINV_TOL)?;
        p.test.matvec(&theta)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Ridge(pub f64);

impl Estimator for Ridge {
    fn name(&self) -> String {
        format!("ridge_{}", self.0)
    }

    fn predict(&self, p: &FitProblem<'_>) -> Result<Vec<f64>> {
        if self.0 == 0.0 {
            return MinNorm.predict(p);
        }
        let theta = ridge_weighted(p.train, p.y, &vec![self.0; p.train.cols()])?;
        p.test.matvec(&theta)
    }
}

/// Posterior mean under a Gaussian prior with known noise variance.
#[derive(Debug, Clone)]
pub struct Bayes(pub PriorSchedule);

impl Estimator for Bayes {
    fn name(&self) -> String {
        "bayes".into()
    }

    fn predict(&self, p: &FitProblem<'_>) -> Result<Vec<f64>> {
        let c = self.0.variances(p.train.cols())?;
        let post = conjugate_posterior(p.train, &c, p.noise_variance, p.y)?;
        p.test.matvec(&post.mean)
    }
}

/// Serializable choice among the built-in estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorKind {
    MinNorm,
    Ridge { lambda: f64 },
    Bayes { prior: PriorSchedule },
}

impl EstimatorKind {
    pub fn build(&self) -> Box<dyn Estimator> {
        match self {
            EstimatorKind::MinNorm => Box::new(MinNorm),
            EstimatorKind::Ridge { lambda } => Box::new(Ridge(*lambda)),
            EstimatorKind::Bayes { prior } => Box::new(Bayes(prior.clone())),
        }
    }
}
