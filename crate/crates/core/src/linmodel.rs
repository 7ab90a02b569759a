//! Exact conjugate inference for `y = Aθ + ε`, `ε ~ N(0, σ²I)`, `θ ~ N(0, C)`
//! with diagonal `C`.
//!
//! With precision `P = AᵀA/σ² + C⁻¹` the posterior is `N(P⁻¹Aᵀy/σ², P⁻¹)`.
//! The log evidence is the Gaussian log density of `y` under
//! `N(0, ACAᵀ + σ²I)`; it is evaluated in weight space (through `P` and the
//! matrix determinant lemma) when the design has fewer columns than rows and
//! in function space otherwise.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::basis::{BasisKind, DesignMatrix};
use crate::numerics::{
    cholesky, dot, logdet_spd, min_norm_least_squares, qr_thin, solve_spd, Matrix, SpdFactor,
    DEFAULT_PINV_TOL,
};
use crate::{Error, Result};

/// Relative size of the diagonal jitter added when a factorization fails.
const JITTER_SCALE: f64 = 1e-10;

/// Prior variance assigned to each coefficient index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorSchedule {
    /// `C_jj = tau2`.
    Constant { tau2: f64 },
    /// `C_jj = tau2 / (1 + j)²`: variance decreasing with the degree.
    YoungDecay { tau2: f64 },
    /// Explicit variances, one per column.
    Explicit { variances: Vec<f64> },
}

impl Default for PriorSchedule {
    fn default() -> Self {
        PriorSchedule::YoungDecay { tau2: 1.0 }
    }
}

impl PriorSchedule {
    pub fn variances(&self, columns: usize) -> Result<Vec<f64>> {
        let v = match self {
            PriorSchedule::Constant { tau2 } => vec![*tau2; columns],
            PriorSchedule::YoungDecay { tau2 } => (0..columns)
                .map(|j| tau2 / ((1 + j) as f64).powi(2))
                .collect(),
            PriorSchedule::Explicit { variances } => {
                if variances.len() < columns {
                    return Err(Error::DimensionMismatch(format!(
                        "explicit prior has {} variances, design has {columns} columns",
                        variances.len()
                    )));
                }
                variances[..columns].to_vec()
            }
        };
        validate_variances(&v)?;
        Ok(v)
    }
}

fn validate_variances(v: &[f64]) -> Result<()> {
    if let Some(bad) = v.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "prior variances must be positive and finite, got {bad}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct GaussianLinearModel {
    design: DesignMatrix,
    prior_variances: Vec<f64>,
    noise_variance: f64,
}

impl GaussianLinearModel {
    pub fn new(design: DesignMatrix, prior_variances: Vec<f64>, noise_variance: f64) -> Result<Self> {
        if prior_variances.len() != design.cols() {
            return Err(Error::DimensionMismatch(format!(
                "{} prior variances for {} design columns",
                prior_variances.len(),
                design.cols()
            )));
        }
        validate_variances(&prior_variances)?;
        if !(noise_variance > 0.0) || !noise_variance.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be positive, got {noise_variance}"
            )));
        }
        Ok(Self {
            design,
            prior_variances,
            noise_variance,
        })
    }

    pub fn with_schedule(design: DesignMatrix, schedule: &PriorSchedule, noise_variance: f64) -> Result<Self> {
        let v = schedule.variances(design.cols())?;
        Self::new(design, v, noise_variance)
    }

    pub fn design(&self) -> &DesignMatrix {
        &self.design
    }

    pub fn prior_variances(&self) -> &[f64] {
        &self.prior_variances
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn posterior(&self, y: &[f64]) -> Result<PosteriorSummary> {
        posterior(self, y)
    }

    pub fn log_evidence(&self, y: &[f64]) -> Result<f64> {
        log_evidence(self, y)
    }

    /// Unnormalized log posterior `log p(y|θ) + log p(θ)`; integrates to the evidence.
    pub fn log_joint(&self, y: &[f64], theta: &[f64]) -> Result<f64> {
        log_joint(self.design.matrix(), &self.prior_variances, self.noise_variance, y, theta)
    }
}

#[derive(Debug, Clone)]
pub struct PosteriorSummary {
    pub mean: Vec<f64>,
    /// Cholesky factor of the posterior precision `P`; the covariance is `P⁻¹`.
    pub precision_factor: SpdFactor,
    pub log_evidence: f64,
    /// Set when a diagonal jitter was needed to factor `P` or `ACAᵀ + σ²I`.
    pub jittered: bool,
}

impl PosteriorSummary {
    pub fn covariance(&self) -> Matrix {
        self.precision_factor.inverse()
    }

    /// `φᵀ Σ_post φ`.
    pub fn variance_along(&self, phi: &[f64]) -> Result<f64> {
        self.precision_factor.inv_quad_form(phi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveSummary {
    pub mean: Vec<f64>,
    /// Pointwise predictive variance, including the noise variance.
    pub variance: Vec<f64>,
}

fn check_len(a: &Matrix, y: &[f64]) -> Result<()> {
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} observations for a design with {} rows",
            y.len(),
            a.rows()
        )));
    }
    Ok(())
}

/// Cholesky with a single `1e-10 · trace / n` diagonal jitter retry.
fn factor_with_jitter(s: &mut Matrix) -> Result<(SpdFactor, bool)> {
    match cholesky(s) {
        Ok(f) => Ok((f, false)),
        Err(Error::NotPositiveDefinite { .. }) => {
            let n = s.rows();
            let jitter = JITTER_SCALE * s.trace() / n as f64;
            s.add_to_diagonal(&vec![jitter; n]);
            Ok((cholesky(s)?, true))
        }
        Err(e) => Err(e),
    }
}

fn precision(a: &Matrix, prior_variances: &[f64], noise_variance: f64) -> Matrix {
    let mut p = a.gram().scale(1.0 / noise_variance);
    let inv: Vec<f64> = prior_variances.iter().map(|c| 1.0 / c).collect();
    p.add_to_diagonal(&inv);
    p
}

/// Posterior from a raw design matrix.
pub fn conjugate_posterior(
    a: &Matrix,
    prior_variances: &[f64],
    noise_variance: f64,
    y: &[f64],
) -> Result<PosteriorSummary> {
    check_len(a, y)?;
    if prior_variances.len() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{} prior variances for {} columns",
            prior_variances.len(),
            a.cols()
        )));
    }
    let mut p = precision(a, prior_variances, noise_variance);
    let (factor, jittered) = factor_with_jitter(&mut p)?;
    let b: Vec<f64> = a.tr_matvec(y)?.iter().map(|v| v / noise_variance).collect();
    let mean = solve_spd(&factor, &b)?;
    let (log_evidence, ev_jitter) = if a.cols() < a.rows() {
        weight_space_from_factor(&factor, &b, prior_variances, noise_variance, y, jittered)
    } else {
        log_evidence_function_space_raw(a, prior_variances, noise_variance, y)?
    };
    Ok(PosteriorSummary {
        mean,
        precision_factor: factor,
        log_evidence,
        jittered: jittered || ev_jitter,
    })
}

fn weight_space_from_factor(
    factor: &SpdFactor,
    b: &[f64],
    prior_variances: &[f64],
    noise_variance: f64,
    y: &[f64],
    jittered: bool,
) -> (f64, bool) {
    let n = y.len() as f64;
    let z = factor.forward(b).expect("matching dimension");
    let quad = dot(y, y) / noise_variance - dot(&z, &z);
    let logdet = n * noise_variance.ln()
        + prior_variances.iter().map(|c| c.ln()).sum::<f64>()
        + logdet_spd(factor);
    (-0.5 * n * (2.0 * PI).ln() - 0.5 * logdet - 0.5 * quad, jittered)
}

/// Log evidence through the `k x k` precision matrix.
pub fn log_evidence_weight_space(model: &GaussianLinearModel, y: &[f64]) -> Result<f64> {
    let a = model.design.matrix();
    check_len(a, y)?;
    let mut p = precision(a, &model.prior_variances, model.noise_variance);
    let (factor, jittered) = factor_with_jitter(&mut p)?;
    let b: Vec<f64> = a.tr_matvec(y)?.iter().map(|v| v / model.noise_variance).collect();
    Ok(weight_space_from_factor(&factor, &b, &model.prior_variances, model.noise_variance, y, jittered).0)
}

fn log_evidence_function_space_raw(
    a: &Matrix,
    prior_variances: &[f64],
    noise_variance: f64,
    y: &[f64],
) -> Result<(f64, bool)> {
    let n = y.len();
    let mut k = a.scaled_outer_gram(prior_variances)?;
    k.add_to_diagonal(&vec![noise_variance; n]);
    let (factor, jittered) = factor_with_jitter(&mut k)?;
    let quad = factor.inv_quad_form(y)?;
    Ok((
        -0.5 * n as f64 * (2.0 * PI).ln() - 0.5 * logdet_spd(&factor) - 0.5 * quad,
        jittered,
    ))
}

/// Log evidence through the `N x N` marginal covariance `ACAᵀ + σ²I`.
pub fn log_evidence_function_space(model: &GaussianLinearModel, y: &[f64]) -> Result<f64> {
    let a = model.design.matrix();
    check_len(a, y)?;
    Ok(log_evidence_function_space_raw(a, &model.prior_variances, model.noise_variance, y)?.0)
}

/// Exact log marginal likelihood `log p(y | model)`.
pub fn log_evidence(model: &GaussianLinearModel, y: &[f64]) -> Result<f64> {
    if model.design.cols() < model.design.rows() {
        log_evidence_weight_space(model, y)
    } else {
        log_evidence_function_space(model, y)
    }
}

pub fn posterior(model: &GaussianLinearModel, y: &[f64]) -> Result<PosteriorSummary> {
    conjugate_posterior(model.design.matrix(), &model.prior_variances, model.noise_variance, y)
}

pub fn predictive(model: &GaussianLinearModel, y: &[f64], new_points: &[f64]) -> Result<PredictiveSummary> {
    let post = posterior(model, y)?;
    let phi = model.design.evaluate(new_points)?;
    let mean = phi.matvec(&post.mean)?;
    let variance = (0..phi.rows())
        .map(|i| Ok(post.variance_along(phi.row(i))? + model.noise_variance))
        .collect::<Result<Vec<_>>>()?;
    Ok(PredictiveSummary { mean, variance })
}

/// `log N(y; Aθ, σ²I) + log N(θ; 0, C)`.
pub fn log_joint(a: &Matrix, prior_variances: &[f64], noise_variance: f64, y: &[f64], theta: &[f64]) -> Result<f64> {
    check_len(a, y)?;
    let fitted = a.matvec(theta)?;
    let rss: f64 = y.iter().zip(&fitted).map(|(u, v)| (u - v).powi(2)).sum();
    let n = y.len() as f64;
    let loglik = -0.5 * n * (2.0 * PI * noise_variance).ln() - 0.5 * rss / noise_variance;
    let logprior: f64 = theta
        .iter()
        .zip(prior_variances)
        .map(|(t, c)| -0.5 * (2.0 * PI * c).ln() - 0.5 * t * t / c)
        .sum();
    Ok(loglik + logprior)
}

/// Ordinary least squares. Data-orthonormal designs return `Qᵀy` directly.
pub fn ols(design: &DesignMatrix, y: &[f64]) -> Result<Vec<f64>> {
    let a = design.matrix();
    check_len(a, y)?;
    if design.spec().kind == BasisKind::DataOrthonormal {
        return a.tr_matvec(y);
    }
    ols_matrix(a, y)
}

pub fn ols_matrix(a: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    check_len(a, y)?;
    if a.rows() < a.cols() {
        return Err(Error::RankDeficient(format!(
            "{} observations cannot identify {} coefficients",
            a.rows(),
            a.cols()
        )));
    }
    let qr = qr_thin(a)?;
    qr.solve_r(&qr.q.tr_matvec(y)?)
}

/// Solves `(AᵀA + λI)θ = Aᵀy`; `λ = 0` falls back to [`ols`].
pub fn ridge(design: &DesignMatrix, y: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if lambda == 0.0 {
        return ols(design, y);
    }
    ridge_weighted(design.matrix(), y, &vec![lambda; design.cols()])
}

/// Solves `(AᵀA + diag(penalties))θ = Aᵀy`.
pub fn ridge_weighted(a: &Matrix, y: &[f64], penalties: &[f64]) -> Result<Vec<f64>> {
    check_len(a, y)?;
    if penalties.len() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{} penalties for {} columns",
            penalties.len(),
            a.cols()
        )));
    }
    if let Some(bad) = penalties.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidArgument(format!("ridge penalty must be nonnegative, got {bad}")));
    }
    let mut g = a.gram();
    g.add_to_diagonal(penalties);
    let factor = cholesky(&g)?;
    solve_spd(&factor, &a.tr_matvec(y)?)
}

/// Minimum-norm least-squares coefficients with the default pseudoinverse cutoff.
pub fn min_norm(design: &DesignMatrix, y: &[f64]) -> Result<Vec<f64>> {
    min_norm_least_squares(design.matrix(), y, DEFAULT_PINV_TOL)
}

/// Residual sum of squares and residual degrees of freedom of the OLS fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualStats {
    pub s: f64,
    pub d: usize,
}

pub fn residual_stats(design: &DesignMatrix, y: &[f64]) -> Result<ResidualStats> {
    let (n, k) = (design.rows(), design.cols());
    if n <= k {
        return Err(Error::InvalidArgument(format!(
            "residual degrees of freedom N - (p+1) = {n} - {k} must be positive (need N > p+1)"
        )));
    }
    let theta = ols(design, y)?;
    let fitted = design.matrix().matvec(&theta)?;
    let s = y.iter().zip(&fitted).map(|(u, v)| (u - v).powi(2)).sum();
    Ok(ResidualStats { s, d: n - k })
}

/// Gaussian log likelihood at the minimum-norm least-squares fit with known `σ²`.
pub fn max_log_likelihood(a: &Matrix, y: &[f64], noise_variance: f64) -> Result<f64> {
    check_len(a, y)?;
    let theta = min_norm_least_squares(a, y, DEFAULT_PINV_TOL)?;
    let fitted = a.matvec(&theta)?;
    let rss: f64 = y.iter().zip(&fitted).map(|(u, v)| (u - v).powi(2)).sum();
    let n = y.len() as f64;
    Ok(-0.5 * n * (2.0 * PI * noise_variance).ln() - 0.5 * rss / noise_variance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{data_orthonormal_design_on, legendre_design, Interval};

    fn unit() -> Interval {
        Interval::symmetric_unit()
    }

    fn scalar_design() -> DesignMatrix {
        // One observation at x = 0 of the constant Legendre column √(1/2),
        // rescaled to the plain scalar design A = [1].
        let d = legendre_design(&[0.0], 0, unit()).unwrap();
        DesignMatrix::from_matrix(d.spec().clone(), vec![0.0], Matrix::identity(1)).unwrap()
    }

    #[test]
    fn scalar_normal_normal_posterior_mean() {
        let (tau2, sigma2, y) = (2.0, 1.0, 3.0);
        let m = GaussianLinearModel::new(scalar_design(), vec![tau2], sigma2).unwrap();
        let post = m.posterior(&[y]).unwrap();
        let z = sigma2 / (sigma2 + tau2);
        assert!((post.mean[0] - (1.0 - z) * y).abs() < 1e-14);
        assert!((post.covariance().get(0, 0) - z * tau2).abs() < 1e-14);
    }

    #[test]
    fn scalar_evidence_is_marginal_normal_density() {
        let (tau2, sigma2, y) = (2.0, 0.5, -1.3);
        let m = GaussianLinearModel::new(scalar_design(), vec![tau2], sigma2).unwrap();
        let v = tau2 + sigma2;
        let expected = -0.5 * (2.0 * PI * v).ln() - 0.5 * y * y / v;
        assert!((m.log_evidence(&[y]).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn flat_and_tight_prior_limits() {
        let x = unit().linspace(3);
        let q = data_orthonormal_design_on(&x, 2, unit()).unwrap();
        let y = [0.3, -1.0, 2.0];
        let flat = GaussianLinearModel::new(q.clone(), vec![1e12; 3], 1.0).unwrap();
        let post = flat.posterior(&y).unwrap();
        let ols = ols(&q, &y).unwrap();
        for (a, b) in post.mean.iter().zip(&ols) {
            assert!((a - b).abs() < 1e-9);
        }
        let tight = GaussianLinearModel::new(q, vec![1e-12; 3], 1.0).unwrap();
        assert!(tight.posterior(&y).unwrap().mean.iter().all(|m| m.abs() < 1e-6));
    }

    #[test]
    fn zero_data_evidence_is_log_normalizer() {
        let x = unit().linspace(5);
        let d = legendre_design(&x, 2, unit()).unwrap();
        let c = vec![1.0, 0.5, 0.25];
        let m = GaussianLinearModel::new(d.clone(), c.clone(), 0.3).unwrap();
        let mut k = d.matrix().scaled_outer_gram(&c).unwrap();
        k.add_to_diagonal(&[0.3; 5]);
        let logdet = logdet_spd(&cholesky(&k).unwrap());
        let expected = -2.5 * (2.0 * PI).ln() - 0.5 * logdet;
        assert!((m.log_evidence(&[0.0; 5]).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn pure_noise_limit_scales_with_sigma() {
        // C → 0: doubling σ² with y = 0 shifts the log evidence by -N/2 log 2.
        let x = unit().linspace(6);
        let d = legendre_design(&x, 1, unit()).unwrap();
        let e1 = GaussianLinearModel::new(d.clone(), vec![1e-14; 2], 0.7).unwrap().log_evidence(&[0.0; 6]).unwrap();
        let e2 = GaussianLinearModel::new(d, vec![1e-14; 2], 1.4).unwrap().log_evidence(&[0.0; 6]).unwrap();
        assert!((e2 - e1 + 3.0 * 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn dimension_mismatch() {
        let d = legendre_design(&[0.0, 0.5], 1, unit()).unwrap();
        let m = GaussianLinearModel::new(d, vec![1.0, 1.0], 1.0).unwrap();
        assert!(matches!(m.posterior(&[1.0]), Err(Error::DimensionMismatch(_))));
        assert!(matches!(m.log_evidence(&[1.0, 2.0, 3.0]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn model_validation() {
        let d = legendre_design(&[0.0, 0.5], 1, unit()).unwrap();
        assert!(GaussianLinearModel::new(d.clone(), vec![1.0], 1.0).is_err());
        assert!(GaussianLinearModel::new(d.clone(), vec![1.0, 0.0], 1.0).is_err());
        assert!(GaussianLinearModel::new(d, vec![1.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn predictive_tight_prior_collapses_to_noise() {
        let x = unit().linspace(4);
        let d = legendre_design(&x, 3, unit()).unwrap();
        let m = GaussianLinearModel::new(d, vec![1e-14; 4], 0.2).unwrap();
        let p = predictive(&m, &[1.0, -1.0, 0.5, 2.0], &[-0.9, 0.0, 0.7]).unwrap();
        for (mu, v) in p.mean.iter().zip(&p.variance) {
            assert!(mu.abs() < 1e-10);
            assert!((v - 0.2).abs() < 1e-10);
        }
    }

    #[test]
    fn predictive_rejects_out_of_domain() {
        let d = legendre_design(&[0.0, 0.5], 1, unit()).unwrap();
        let m = GaussianLinearModel::new(d, vec![1.0, 1.0], 1.0).unwrap();
        assert!(matches!(predictive(&m, &[0.0, 1.0], &[3.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn ols_on_orthonormal_design_is_qty() {
        let x = unit().linspace(7);
        let q = data_orthonormal_design_on(&x, 3, unit()).unwrap();
        let y = [0.1, -0.4, 0.9, 1.2, 0.0, -2.0, 0.5];
        let qty = q.matrix().tr_matvec(&y).unwrap();
        let via_qr = ols_matrix(q.matrix(), &y).unwrap();
        for (a, b) in qty.iter().zip(&via_qr) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(ols(&q, &y).unwrap(), qty);
    }

    #[test]
    fn ridge_limits() {
        let x = unit().linspace(6);
        let d = legendre_design(&x, 2, unit()).unwrap();
        let y = [1.0, 0.5, -0.2, 0.3, 0.9, 1.4];
        assert_eq!(ridge(&d, &y, 0.0).unwrap(), ols(&d, &y).unwrap());
        assert!(ridge(&d, &y, 1e14).unwrap().iter().all(|t| t.abs() < 1e-12));
        assert!(ridge(&d, &y, -1.0).is_err());
    }

    #[test]
    fn ols_rank_deficiency() {
        let d = legendre_design(&[0.0, 0.5], 3, unit()).unwrap();
        assert!(matches!(ols(&d, &[1.0, 2.0]), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn residual_stats_cases() {
        let x = [-1.0, 0.0, 1.0];
        let d = legendre_design(&x, 1, unit()).unwrap();
        let r = residual_stats(&d, &[1.0, 3.0, 5.0]).unwrap();
        assert_eq!(r.d, 1);
        assert!(r.s < 1e-24);
        let square = legendre_design(&x, 2, unit()).unwrap();
        let err = residual_stats(&square, &[1.0, 3.0, 5.0]).unwrap_err();
        assert!(err.to_string().contains("N > p+1"));
    }

    #[test]
    fn schedules() {
        assert_eq!(PriorSchedule::Constant { tau2: 2.0 }.variances(2).unwrap(), vec![2.0, 2.0]);
        assert_eq!(
            PriorSchedule::YoungDecay { tau2: 4.0 }.variances(3).unwrap(),
            vec![4.0, 1.0, 4.0 / 9.0]
        );
        assert!(PriorSchedule::Explicit { variances: vec![1.0] }.variances(2).is_err());
        assert!(PriorSchedule::Constant { tau2: -1.0 }.variances(2).is_err());
    }
}
