use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimators::{Estimator, FitProblem};
use super::{generate, mean_squared_difference, Dataset, GeneratorSpec, TAG_FEATURES, TAG_REPLICATE};
use crate::basis::{
    data_orthonormal_design_on, legendre_design, random_feature_design_with, BasisKind, DesignMatrix, Interval,
    RandomFeatures,
};
use crate::linmodel::{conjugate_posterior, GaussianLinearModel, PriorSchedule};
use crate::numerics::{min_norm_least_squares, Matrix, DEFAULT_PINV_TOL};
use crate::rng::{derive_seed, stream};
use crate::selection::{bic, model_evidence};
use crate::{Error, Result};

/// Settings shared by the Monte-Carlo risk routines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub complexities: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    /// Prior of the Bayes estimator and of the reported evidence.
    pub prior: PriorSchedule,
    /// Basis used once the complexity exceeds N.
    pub feature_kind: BasisKind,
    /// Multiplier of the random-feature frequencies; `None` uses `2N/(b − a)`.
    pub frequency_scale: Option<f64>,
    pub test_points: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            complexities: (2..=80).collect(),
            replicates: 100,
            seed: 0,
            prior: PriorSchedule::default(),
            feature_kind: BasisKind::RandomFourier,
            frequency_scale: None,
            test_points: 512,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.complexities.is_empty() {
            return Err(Error::InvalidArgument("complexity list is empty".into()));
        }
        if self.complexities.contains(&0) {
            return Err(Error::InvalidArgument("complexities must be at least 1".into()));
        }
        if !self.complexities.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument("complexities must be strictly increasing".into()));
        }
        if self.replicates < 2 {
            return Err(Error::InvalidArgument("at least 2 replicates are needed".into()));
        }
        if self.test_points < 2 {
            return Err(Error::InvalidArgument("at least 2 test points are needed".into()));
        }
        if !self.feature_kind.is_random() {
            return Err(Error::InvalidArgument(format!(
                "{:?} is not a random feature kind",
                self.feature_kind
            )));
        }
        if let Some(s) = self.frequency_scale {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::InvalidArgument(format!("frequency scale must be positive, got {s}")));
            }
        }
        self.prior.variances(1)?;
        Ok(())
    }

    fn scale_for(&self, n: usize, domain: Interval) -> f64 {
        self.frequency_scale.unwrap_or(2.0 * n as f64 / domain.width())
    }
}

/// Training and test designs for one complexity: a data-orthonormal
/// polynomial of degree `complexity − 1` up to `N` columns, random features
/// beyond. Features come from one stream per master seed, so widths are nested.
pub fn complexity_design(
    complexity: usize,
    x: &[f64],
    test_x: &[f64],
    domain: Interval,
    config: &SweepConfig,
) -> Result<(DesignMatrix, Matrix)> {
    let n = x.len();
    let design = if complexity <= n {
        data_orthonormal_design_on(x, complexity - 1, domain)?
    } else {
        let seed = derive_seed(config.seed, &[TAG_FEATURES]);
        let features = RandomFeatures::draw(config.feature_kind, complexity, seed, config.scale_for(n, domain))?;
        random_feature_design_with(x, features, domain, Some(seed))?
    };
    let test = design.evaluate(test_x)?;
    Ok((design, test))
}

/// Monte-Carlo summary of per-replicate values.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub median: f64,
    pub samples: Vec<f64>,
}

impl RiskEstimate {
    pub fn from_samples(samples: Vec<f64>) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / n).sqrt(),
            median: median(&samples),
            samples,
        }
    }
}

pub(crate) fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

struct Replicates {
    spec: GeneratorSpec,
    data: Vec<Dataset>,
    test_x: Vec<f64>,
    f_true_test: Vec<f64>,
}

fn replicates(spec: &GeneratorSpec, config: &SweepConfig) -> Result<Replicates> {
    config.validate()?;
    let spec = spec.resolved(config.seed)?;
    let data = (0..config.replicates as u64)
        .into_par_iter()
        .map(|r| generate(&spec, derive_seed(config.seed, &[TAG_REPLICATE, r])))
        .collect::<Result<Vec<_>>>()?;
    let test_x = spec.domain.linspace(config.test_points);
    let coefficients = spec.true_coefficients(config.seed);
    let f_true_test = spec.f_true(&coefficients, &test_x)?;
    Ok(Replicates {
        spec,
        data,
        test_x,
        f_true_test,
    })
}

/// Risk `E[(f_true − f̂)²]` averaged over the test grid, excluding the noise
/// variance, estimated over fresh training sets.
pub fn frequentist_risk(
    spec: &GeneratorSpec,
    complexity: usize,
    estimator: &dyn Estimator,
    config: &SweepConfig,
) -> Result<RiskEstimate> {
    let reps = replicates(spec, config)?;
    let first = &reps.data[0];
    let (design, test) = complexity_design(complexity, &first.x, &reps.test_x, reps.spec.domain, config)?;
    let noise_variance = reps.spec.noise_sd.powi(2);
    let samples = reps
        .data
        .par_iter()
        .map(|d| {
            let problem = FitProblem {
                train: design.matrix(),
                test: &test,
                y: &d.y,
                noise_variance,
                x: &d.x,
                f_true_test: &reps.f_true_test,
            };
            mean_squared_difference(&reps.f_true_test, &estimator.predict(&problem)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RiskEstimate::from_samples(samples))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskCurvePoint {
    pub complexity: usize,
    /// Mean over replicates of the min-norm training error.
    pub train_mse: f64,
    pub train_mse_max: f64,
    pub test_risk_mle: RiskEstimate,
    pub test_risk_bayes: RiskEstimate,
    /// Replicate means of the exact log evidence and BIC of the Bayes model.
    pub log_evidence: f64,
    pub bic: f64,
    pub replicates: usize,
}

struct Outcome {
    train_mse: f64,
    risk_mle: f64,
    risk_bayes: f64,
    log_evidence: f64,
    bic: f64,
}

fn replicate_outcome(
    a: &Matrix,
    test: &Matrix,
    prior: &[f64],
    noise_variance: f64,
    y: &[f64],
    f_true_test: &[f64],
) -> Result<Outcome> {
    let theta = min_norm_least_squares(a, y, DEFAULT_PINV_TOL)?;
    let fitted = a.matvec(&theta)?;
    let train_mse = mean_squared_difference(y, &fitted)?;
    let risk_mle = mean_squared_difference(f_true_test, &test.matvec(&theta)?)?;
    let n = y.len();
    let mle_loglik =
        -0.5 * n as f64 * (2.0 * std::f64::consts::PI * noise_variance).ln() - 0.5 * n as f64 * train_mse / noise_variance;
    let post = conjugate_posterior(a, prior, noise_variance, y)?;
    let risk_bayes = mean_squared_difference(f_true_test, &test.matvec(&post.mean)?)?;
    Ok(Outcome {
        train_mse,
        risk_mle,
        risk_bayes,
        log_evidence: post.log_evidence,
        bic: bic(mle_loglik, a.cols(), n),
    })
}

/// Train error, min-norm and Bayes test risk, evidence and BIC per complexity.
///
/// Replicate `r` uses the same training set at every complexity, so the
/// curves are compared under common random numbers.
pub fn double_descent_sweep(spec: &GeneratorSpec, config: &SweepConfig) -> Result<Vec<RiskCurvePoint>> {
    let reps = replicates(spec, config)?;
    let x = &reps.data[0].x;
    let noise_variance = reps.spec.noise_sd.powi(2);
    config
        .complexities
        .par_iter()
        .map(|&c| {
            let (design, test) = complexity_design(c, x, &reps.test_x, reps.spec.domain, config)?;
            let prior = config.prior.variances(c)?;
            let outcomes = reps
                .data
                .par_iter()
                .map(|d| replicate_outcome(design.matrix(), &test, &prior, noise_variance, &d.y, &reps.f_true_test))
                .collect::<Result<Vec<_>>>()?;
            let r = outcomes.len() as f64;
            Ok(RiskCurvePoint {
                complexity: c,
                train_mse: outcomes.iter().map(|o| o.train_mse).sum::<f64>() / r,
                train_mse_max: outcomes.iter().map(|o| o.train_mse).fold(0.0, f64::max),
                test_risk_mle: RiskEstimate::from_samples(outcomes.iter().map(|o| o.risk_mle).collect()),
                test_risk_bayes: RiskEstimate::from_samples(outcomes.iter().map(|o| o.risk_bayes).collect()),
                log_evidence: outcomes.iter().map(|o| o.log_evidence).sum::<f64>() / r,
                bic: outcomes.iter().map(|o| o.bic).sum::<f64>() / r,
                replicates: outcomes.len(),
            })
        })
        .collect()
}

/// Basis and prior used when scoring polynomial degrees by evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvidenceOptions {
    pub prior: PriorSchedule,
    pub basis: BasisKind,
}

impl Default for EvidenceOptions {
    fn default() -> Self {
        Self {
            prior: PriorSchedule::Constant { tau2: 1.0 },
            basis: BasisKind::Legendre,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvidencePoint {
    pub degree: usize,
    pub log_evidence: f64,
    pub laplace_log_evidence: f64,
    pub bic: f64,
}

/// Exact log evidence (with Laplace and BIC alongside) of polynomial models
/// of each degree, noise variance known.
pub fn evidence_sweep(dataset: &Dataset, degrees: &[usize], options: &EvidenceOptions) -> Result<Vec<EvidencePoint>> {
    let n = dataset.x.len();
    if let Some(d) = degrees.iter().find(|d| **d >= n) {
        return Err(Error::InvalidArgument(format!("degree {d} needs more than N = {n} observations")));
    }
    let noise_variance = dataset.spec.noise_sd.powi(2);
    degrees
        .par_iter()
        .map(|&degree| {
            let design = match options.basis {
                BasisKind::Legendre => legendre_design(&dataset.x, degree, dataset.spec.domain)?,
                BasisKind::DataOrthonormal => data_orthonormal_design_on(&dataset.x, degree, dataset.spec.domain)?,
                other => {
                    return Err(Error::InvalidArgument(format!("{other:?} is not a polynomial basis")));
                }
            };
            let model = GaussianLinearModel::with_schedule(design, &options.prior, noise_variance)?;
            let ev = model_evidence(&model, &dataset.y)?;
            Ok(EvidencePoint {
                degree,
                log_evidence: ev.log_evidence,
                laplace_log_evidence: ev.laplace_log_evidence,
                bic: ev.bic,
            })
        })
        .collect()
}

/// Upper `level` bootstrap quantile of `median(a) − median(b)`, resampling
/// replicate indices jointly. A negative bound means `a` has the smaller
/// median at that one-sided confidence.
pub fn paired_median_difference_bound(a: &[f64], b: &[f64], resamples: usize, level: f64, seed: u64) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::DimensionMismatch(format!("paired samples of lengths {} and {}", a.len(), b.len())));
    }
    if resamples == 0 || !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument("need resamples > 0 and level in (0, 1)".into()));
    }
    let mut rng = stream(seed);
    let n = a.len();
    let mut diffs: Vec<f64> = (0..resamples)
        .map(|_| {
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let ra: Vec<f64> = idx.iter().map(|&i| a[i]).collect();
            let rb: Vec<f64> = idx.iter().map(|&i| b[i]).collect();
            median(&ra) - median(&rb)
        })
        .collect();
    diffs.sort_by(f64::total_cmp);
    let pos = ((level * resamples as f64).ceil() as usize).clamp(1, resamples) - 1;
    Ok(diffs[pos])
}
