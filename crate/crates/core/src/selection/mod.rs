//! Model comparison over a finite list of candidate models.
//!
//! BIC is reported in reward form, `log p(y|θ̂) − (k/2) log n`, so that larger
//! values are better and `exp(BIC)` can be normalized like an evidence.

mod discrete;
mod laplace;

pub use discrete::{discrete_evidence, integers, Rational, ArithmeticHypothesis, CubicHypothesis, DiscreteEvidence, DiscreteHypothesis};
pub use laplace::{central_gradient, central_hessian, laplace_log_evidence, laplace_log_evidence_with, FdSteps};

use rayon::prelude::*;

use crate::linmodel::{max_log_likelihood, GaussianLinearModel};
use crate::{Error, Result};

/// Reward-form Bayesian information criterion.
pub fn bic(mle_loglik: f64, k: usize, n: usize) -> f64 {
    mle_loglik - 0.5 * k as f64 * (n as f64).ln()
}

/// Normalizes `exp(log_w)` with the maximum subtracted first.
pub fn normalize_log_weights(log_w: &[f64]) -> Vec<f64> {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

#[derive(Debug, Clone)]
pub struct ModelList {
    models: Vec<GaussianLinearModel>,
    prior_probs: Vec<f64>,
}

impl ModelList {
    pub fn new(models: Vec<GaussianLinearModel>, prior_probs: Vec<f64>) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::InvalidArgument("model list is empty".into()));
        }
        if prior_probs.len() != models.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} prior probabilities for {} models",
                prior_probs.len(),
                models.len()
            )));
        }
        if prior_probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidArgument("prior probabilities must be nonnegative".into()));
        }
        let total: f64 = prior_probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("prior probabilities sum to {total}, not 1")));
        }
        Ok(Self { models, prior_probs })
    }

    pub fn uniform(models: Vec<GaussianLinearModel>) -> Result<Self> {
        let n = models.len().max(1);
        Self::new(models, vec![1.0 / n as f64; n])
    }

    pub fn models(&self) -> &[GaussianLinearModel] {
        &self.models
    }

    pub fn prior_probs(&self) -> &[f64] {
        &self.prior_probs
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelEvidence {
    pub log_evidence: f64,
    pub laplace_log_evidence: f64,
    pub bic: f64,
    pub mle_loglik: f64,
    pub k: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceReport {
    pub models: Vec<ModelEvidence>,
    /// Posterior over models from the exact evidences.
    pub posterior_probs: Vec<f64>,
    /// The same posterior with `exp(BIC)` standing in for the evidence.
    pub bic_posterior_probs: Vec<f64>,
}

impl EvidenceReport {
    pub fn argmax_evidence(&self) -> usize {
        argmax(self.models.iter().map(|m| m.log_evidence))
    }

    pub fn argmax_bic(&self) -> usize {
        argmax(self.models.iter().map(|m| m.bic))
    }
}

/// Index of the first maximum.
pub fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Exact, Laplace and BIC summaries for one conjugate model.
pub fn model_evidence(model: &GaussianLinearModel, y: &[f64]) -> Result<ModelEvidence> {
    let post = model.posterior(y)?;
    let laplace = laplace_log_evidence(|t| model.log_joint(y, t).unwrap_or(f64::NAN), &post.mean, 1e-4)?;
    let a = model.design().matrix();
    let mle_loglik = max_log_likelihood(a, y, model.noise_variance())?;
    let (k, n) = (a.cols(), a.rows());
    Ok(ModelEvidence {
        log_evidence: post.log_evidence,
        laplace_log_evidence: laplace,
        bic: bic(mle_loglik, k, n),
        mle_loglik,
        k,
        n,
    })
}

pub fn model_posterior(list: &ModelList, y: &[f64]) -> Result<EvidenceReport> {
    let models = list
        .models
        .par_iter()
        .map(|m| model_evidence(m, y))
        .collect::<Result<Vec<_>>>()?;
    let log_prior: Vec<f64> = list.prior_probs.iter().map(|p| p.ln()).collect();
    let exact: Vec<f64> = models.iter().zip(&log_prior).map(|(m, lp)| m.log_evidence + lp).collect();
    let by_bic: Vec<f64> = models.iter().zip(&log_prior).map(|(m, lp)| m.bic + lp).collect();
    Ok(EvidenceReport {
        posterior_probs: normalize_log_weights(&exact),
        bic_posterior_probs: normalize_log_weights(&by_bic),
        models,
    })
}

/// `p(y|M_i) / p(y|M_j)`.
pub fn bayes_factor(report: &EvidenceReport, i: usize, j: usize) -> Result<f64> {
    let len = report.models.len();
    for idx in [i, j] {
        if idx >= len {
            return Err(Error::IndexOutOfRange { index: idx, len });
        }
    }
    Ok((report.models[i].log_evidence - report.models[j].log_evidence).exp())
}
