//! Empirical Bayes for an orthonormal design.
//!
//! With `QᵀQ = I` the OLS coefficients satisfy `θ̂_i | θ_i ~ N(θ_i, σ²)` and,
//! under `θ_i ~ N(0, σ_i²)`, marginally `θ̂_i ~ N(0, σ_i² + σ²)`. Writing
//! `z_i = σ²/(σ_i² + σ²)`, `V_i = z_i/σ²` and `V_{p+1} = 1/σ²`, an ordering
//! `σ_0² ≥ … ≥ σ_p²` becomes `V_0 ≤ … ≤ V_p ≤ V_{p+1}`. The hyperparameters are
//! estimated coordinate-wise under Gamma priors and then projected onto that
//! order with PAVA.

mod pava;

pub use pava::{pava, Isotonic};

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::basis::DesignMatrix;
use crate::linmodel::{ols, residual_stats};
use crate::{Error, Result};

/// Sufficient statistics of an orthonormal-design OLS fit.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientStats {
    pub theta_hat: Vec<f64>,
    /// Residual sum of squares.
    pub s: f64,
    /// Residual degrees of freedom `N − (p+1)`.
    pub d: usize,
    pub n: usize,
}

impl CoefficientStats {
    pub fn new(theta_hat: Vec<f64>, s: f64, n: usize) -> Result<Self> {
        let k = theta_hat.len();
        if n <= k {
            return Err(Error::InvalidArgument(format!(
                "residual degrees of freedom N - (p+1) = {n} - {k} must be positive (need N > p+1)"
            )));
        }
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::InvalidArgument(format!("residual sum of squares must be nonnegative, got {s}")));
        }
        if theta_hat.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("coefficient estimate".into()));
        }
        Ok(Self {
            theta_hat,
            s,
            d: n - k,
            n,
        })
    }

    /// Statistics from a design whose columns are orthonormal over its rows.
    pub fn from_design(design: &DesignMatrix, y: &[f64]) -> Result<Self> {
        let g = design.matrix().gram();
        let off = (0..g.rows())
            .flat_map(|i| (0..g.cols()).map(move |j| (i, j)))
            .map(|(i, j)| (g.get(i, j) - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        if off > 1e-8 {
            return Err(Error::InvalidArgument(format!(
                "design columns are not orthonormal (max |QᵀQ - I| = {off:e})"
            )));
        }
        let rs = residual_stats(design, y)?;
        Self::new(ols(design, y)?, rs.s, design.rows())
    }

    pub fn coefficients(&self) -> usize {
        self.theta_hat.len()
    }
}

/// Gamma priors `p(V_i) ∝ V_i^{γ_i − 1} e^{−V_i/β_i}`, one per `V_0, …, V_{p+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaPriorSchedule {
    pub shapes: Vec<f64>,
    pub scales: Vec<f64>,
}

impl GammaPriorSchedule {
    pub fn new(shapes: Vec<f64>, scales: Vec<f64>) -> Result<Self> {
        let s = Self { shapes, scales };
        s.validate()?;
        Ok(s)
    }

    /// `γ_i = 1 + 0.1·i`, `β_i = 10` for `coefficients + 1` hyperparameters.
    pub fn default_for(coefficients: usize) -> Self {
        let m = coefficients + 1;
        Self {
            shapes: (0..m).map(|i| 1.0 + 0.1 * i as f64).collect(),
            scales: vec![10.0; m],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shapes.len() != self.scales.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} shapes with {} scales",
                self.shapes.len(),
                self.scales.len()
            )));
        }
        if let Some(g) = self.shapes.iter().find(|g| !(**g > 0.5) || !g.is_finite()) {
            return Err(Error::InvalidArgument(format!("Gamma shapes must exceed 1/2, got {g}")));
        }
        if let Some(b) = self.scales.iter().find(|b| !(**b > 0.0) || !b.is_finite()) {
            return Err(Error::InvalidArgument(format!("Gamma scales must be positive, got {b}")));
        }
        Ok(())
    }

    fn check_for(&self, stats: &CoefficientStats) -> Result<()> {
        self.validate()?;
        if self.shapes.len() != stats.coefficients() + 1 {
            return Err(Error::DimensionMismatch(format!(
                "schedule has {} entries, need p+2 = {}",
                self.shapes.len(),
                stats.coefficients() + 1
            )));
        }
        Ok(())
    }
}

fn check_hyper(stats: &CoefficientStats, z: &[f64], sigma2: f64) -> Result<()> {
    if z.len() != stats.coefficients() {
        return Err(Error::DimensionMismatch(format!(
            "{} shrinkage factors for {} coefficients",
            z.len(),
            stats.coefficients()
        )));
    }
    if let Some(bad) = z.iter().find(|z| !(**z > 0.0 && **z <= 1.0)) {
        return Err(Error::Domain(format!("z must lie in (0, 1], got {bad}")));
    }
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::Domain(format!("sigma2 must be positive, got {sigma2}")));
    }
    if !(stats.s > 0.0) {
        return Err(Error::Domain("residual sum of squares must be positive".into()));
    }
    Ok(())
}

/// Log of the joint hyperparameter likelihood
/// `(σ²)^{−N/2} s^{(d−2)/2} e^{−s/2σ²} Π z_i^{1/2} e^{−θ̂_i² z_i/2σ²}`,
/// with the proportionality constant set to zero.
pub fn joint_hyper_loglik(stats: &CoefficientStats, z: &[f64], sigma2: f64) -> Result<f64> {
    check_hyper(stats, z, sigma2)?;
    let (n, d) = (stats.n as f64, stats.d as f64);
    let mut l = -0.5 * n * sigma2.ln() + 0.5 * (d - 2.0) * stats.s.ln() - stats.s / (2.0 * sigma2);
    for (t, zi) in stats.theta_hat.iter().zip(z) {
        l += 0.5 * zi.ln() - t * t * zi / (2.0 * sigma2);
    }
    Ok(l)
}

/// Gradient of [`joint_hyper_loglik`]: `(∂/∂z_0, …, ∂/∂z_p, ∂/∂σ²)`.
pub fn joint_hyper_gradient(stats: &CoefficientStats, z: &[f64], sigma2: f64) -> Result<Vec<f64>> {
    check_hyper(stats, z, sigma2)?;
    let mut g: Vec<f64> = stats
        .theta_hat
        .iter()
        .zip(z)
        .map(|(t, zi)| 0.5 / zi - t * t / (2.0 * sigma2))
        .collect();
    let weighted: f64 = stats.theta_hat.iter().zip(z).map(|(t, zi)| t * t * zi).sum();
    let s4 = sigma2 * sigma2;
    g.push(-0.5 * stats.n as f64 / sigma2 + stats.s / (2.0 * s4) + weighted / (2.0 * s4));
    Ok(g)
}

/// Per-coordinate objective `a·log V − r·V` whose maximizer is `a/r`.
#[derive(Debug, Clone, Copy)]
struct Coordinate {
    a: f64,
    r: f64,
}

fn coordinates(stats: &CoefficientStats, schedule: &GammaPriorSchedule) -> Result<Vec<Coordinate>> {
    schedule.check_for(stats)?;
    let k = stats.coefficients();
    let mut out: Vec<Coordinate> = stats
        .theta_hat
        .iter()
        .enumerate()
        .map(|(i, t)| Coordinate {
            a: schedule.shapes[i] - 0.5,
            r: 1.0 / schedule.scales[i] + t * t / 2.0,
        })
        .collect();
    out.push(Coordinate {
        a: schedule.shapes[k] - 1.0 + stats.d as f64 / 2.0,
        r: 1.0 / schedule.scales[k] + stats.s / 2.0,
    });
    Ok(out)
}

/// Coordinate-wise MAP of `V_0, …, V_{p+1}`.
///
/// In `V` coordinates the log likelihood separates as
/// `Σ_i (½ log V_i − θ̂_i² V_i/2) + (d/2) log V_{p+1} − s V_{p+1}/2`; adding
/// `(γ−1) log V − V/β` gives `V̂_i = (γ_i − ½)/(1/β_i + θ̂_i²/2)` and
/// `V̂_{p+1} = (γ_{p+1} − 1 + d/2)/(1/β_{p+1} + s/2)`.
pub fn unconstrained_v_map(stats: &CoefficientStats, schedule: &GammaPriorSchedule) -> Result<Vec<f64>> {
    coordinates(stats, schedule)?
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let v = c.a / c.r;
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Domain(format!("unconstrained V_{i} = {v} is not positive")))
            }
        })
        .collect()
}

/// Weights handed to PAVA.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PavaWeights {
    #[default]
    Unit,
    /// Negative curvature of the coordinate log posterior at its maximum, `r²/a`.
    Precision,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PavaFit {
    pub v_unconstrained: Vec<f64>,
    pub v_isotonic: Vec<f64>,
    pub weights: Vec<f64>,
    /// `z_i = V*_i / V*_{p+1}` for the `p+1` coefficients.
    pub z: Vec<f64>,
    pub sigma2_hat: f64,
    pub pool_blocks: Vec<Range<usize>>,
}

pub fn deaton_fit(stats: &CoefficientStats, schedule: &GammaPriorSchedule) -> Result<PavaFit> {
    deaton_fit_weighted(stats, schedule, PavaWeights::Unit)
}

pub fn deaton_fit_weighted(
    stats: &CoefficientStats,
    schedule: &GammaPriorSchedule,
    weighting: PavaWeights,
) -> Result<PavaFit> {
    let v_unconstrained = unconstrained_v_map(stats, schedule)?;
    let weights: Vec<f64> = match weighting {
        PavaWeights::Unit => vec![1.0; v_unconstrained.len()],
        PavaWeights::Precision => coordinates(stats, schedule)?.iter().map(|c| c.r * c.r / c.a).collect(),
    };
    let iso = pava(&v_unconstrained, &weights)?;
    let top = *iso.fitted.last().expect("at least the noise coordinate");
    let z = iso.fitted[..stats.coefficients()]
        .iter()
        .map(|v| (v / top).min(1.0))
        .collect();
    Ok(PavaFit {
        v_unconstrained,
        sigma2_hat: 1.0 / top,
        v_isotonic: iso.fitted,
        weights,
        z,
        pool_blocks: iso.blocks,
    })
}

/// `(1 − z_i)·θ̂_i`.
pub fn shrinkage_posterior_means(stats: &CoefficientStats, fit: &PavaFit) -> Vec<f64> {
    stats.theta_hat.iter().zip(&fit.z).map(|(t, z)| (1.0 - z) * t).collect()
}

/// Posterior variances `(1 − z_i)·σ̂²`.
pub fn shrinkage_posterior_variances(fit: &PavaFit) -> Vec<f64> {
    fit.z.iter().map(|z| (1.0 - z) * fit.sigma2_hat).collect()
}

/// Prior variances `σ_i² = σ̂²(1 − z_i)/z_i` implied by a fit, floored at
/// `1e-12·σ̂²` so that pooled coordinates with `z_i = 1` stay proper.
pub fn induced_prior_variances(fit: &PavaFit) -> Vec<f64> {
    let floor = 1e-12 * fit.sigma2_hat;
    fit.z
        .iter()
        .map(|z| (fit.sigma2_hat * (1.0 - z) / z).max(floor))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMeansBayes {
    pub means: Vec<f64>,
    /// Per-coordinate Bayes risk `σ²τ_i²/(σ² + τ_i²)`.
    pub risks: Vec<f64>,
    pub average_risk: f64,
}

/// Posterior means for `y_i ~ N(θ_i, σ²)`, `θ_i ~ N(0, τ_i²)`. `tau2` holds
/// either one shared variance or one per observation.
pub fn gaussian_means_bayes(y: &[f64], tau2: &[f64], sigma2: f64) -> Result<GaussianMeansBayes> {
    if tau2.len() != 1 && tau2.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} prior variances for {} observations",
            tau2.len(),
            y.len()
        )));
    }
    if tau2.iter().chain([&sigma2]).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument("variances must be positive".into()));
    }
    let tau = |i: usize| if tau2.len() == 1 { tau2[0] } else { tau2[i] };
    let mut means = Vec::with_capacity(y.len());
    let mut risks = Vec::with_capacity(y.len());
    for (i, yi) in y.iter().enumerate() {
        // τ²/(τ² + σ²) written to stay finite as τ² → ∞.
        let keep = 1.0 / (1.0 + sigma2 / tau(i));
        means.push(keep * yi);
        risks.push(sigma2 * keep);
    }
    let average_risk = if risks.is_empty() {
        0.0
    } else {
        risks.iter().sum::<f64>() / risks.len() as f64
    };
    Ok(GaussianMeansBayes {
        means,
        risks,
        average_risk,
    })
}

/// `nτ²/(σ² + nτ²)·ȳ + σ²/(σ² + nτ²)·μ_0`.
pub fn james_stein_style_mean(ybar: f64, n: usize, mu0: f64, tau2: f64, sigma2: f64) -> f64 {
    let shrink = 1.0 / (1.0 + n as f64 * tau2 / sigma2);
    ybar + shrink * (mu0 - ybar)
}
