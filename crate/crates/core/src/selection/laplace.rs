//! Laplace approximation of an evidence integral from finite-difference
//! derivatives of the log posterior at its mode.

use std::f64::consts::PI;

use crate::numerics::{cholesky, logdet_spd, norm2, Matrix};
use crate::{Error, Result};

/// Relative and absolute finite-difference steps: `h_j = max(abs, rel·|θ_j|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSteps {
    pub gradient: f64,
    pub hessian: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        Self {
            gradient: 1e-5,
            // Second differences lose about 4ε|f|/h² to cancellation; at 1e-5
            // that is already ~1e-5 relative for moderate |f|.
            hessian: 1e-3,
        }
    }
}

fn step(scale: f64, t: f64) -> f64 {
    scale.max(scale * t.abs())
}

pub fn central_gradient(f: impl Fn(&[f64]) -> f64, theta: &[f64], scale: f64) -> Vec<f64> {
    let mut t = theta.to_vec();
    (0..theta.len())
        .map(|j| {
            let h = step(scale, theta[j]);
            t[j] = theta[j] + h;
            let up = f(&t);
            t[j] = theta[j] - h;
            let down = f(&t);
            t[j] = theta[j];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Symmetric central-difference Hessian.
pub fn central_hessian(f: impl Fn(&[f64]) -> f64, theta: &[f64], scale: f64) -> Matrix {
    let k = theta.len();
    let h: Vec<f64> = theta.iter().map(|t| step(scale, *t)).collect();
    let f0 = f(theta);
    let mut t = theta.to_vec();
    let mut eval = |shifts: &[(usize, f64)]| {
        for &(j, s) in shifts {
            t[j] += s;
        }
        let v = f(&t);
        for &(j, _) in shifts {
            t[j] = theta[j];
        }
        v
    };
    let mut hess = Matrix::zeros(k, k);
    for i in 0..k {
        let d2 = (eval(&[(i, h[i])]) - 2.0 * f0 + eval(&[(i, -h[i])])) / (h[i] * h[i]);
        hess.set(i, i, d2);
        for j in 0..i {
            let pp = eval(&[(i, h[i]), (j, h[j])]);
            let pm = eval(&[(i, h[i]), (j, -h[j])]);
            let mp = eval(&[(i, -h[i]), (j, h[j])]);
            let mm = eval(&[(i, -h[i]), (j, -h[j])]);
            let v = (pp - pm - mp + mm) / (4.0 * h[i] * h[j]);
            hess.set(i, j, v);
            hess.set(j, i, v);
        }
    }
    hess
}

/// `log_post(θ̂) + (k/2) log 2π − ½ log det(−H(θ̂))` with the default steps.
///
/// `theta_hat` must already be a mode: the central-difference gradient norm
/// has to be below `mode_tol`.
pub fn laplace_log_evidence(log_post: impl Fn(&[f64]) -> f64, theta_hat: &[f64], mode_tol: f64) -> Result<f64> {
    laplace_log_evidence_with(log_post, theta_hat, mode_tol, FdSteps::default())
}

pub fn laplace_log_evidence_with(
    log_post: impl Fn(&[f64]) -> f64,
    theta_hat: &[f64],
    mode_tol: f64,
    steps: FdSteps,
) -> Result<f64> {
    let k = theta_hat.len();
    let f0 = log_post(theta_hat);
    if !f0.is_finite() {
        return Err(Error::NonFinite(format!("log posterior at the mode is {f0}")));
    }
    if k == 0 {
        return Ok(f0);
    }
    let g = central_gradient(&log_post, theta_hat, steps.gradient);
    let gradient_norm = norm2(&g);
    if !(gradient_norm < mode_tol) {
        return Err(Error::NotAtMode {
            gradient_norm,
            tolerance: mode_tol,
        });
    }
    let neg_h = central_hessian(&log_post, theta_hat, steps.hessian).scale(-1.0);
    let factor = cholesky(&neg_h)?;
    Ok(f0 + 0.5 * k as f64 * (2.0 * PI).ln() - 0.5 * logdet_spd(&factor))
}
