//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use ddlab::numerics::Matrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

/// Oracle RNG, deliberately a different generator from the library's streams.
pub fn oracle_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed ^ 0x05ee_d0f0_ac1e)
}

pub fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Plain three-term recurrence for the unnormalized Legendre polynomial P_n.
pub fn legendre_p(n: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return 1.0;
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Log of ∫∫ N(y; Aθ, σ²I) N(θ; 0, diag(c)) dθ on a `points`² trapezoid grid
/// spanning ±8 prior standard deviations.
pub fn quadrature_log_evidence_2d(a: &Matrix, c: [f64; 2], sigma2: f64, y: &[f64], points: usize) -> f64 {
    use std::f64::consts::PI;
    let n = y.len() as f64;
    let sd = [c[0].sqrt(), c[1].sqrt()];
    let h = [16.0 * sd[0] / (points - 1) as f64, 16.0 * sd[1] / (points - 1) as f64];
    let mut terms = Vec::with_capacity(points * points);
    for i in 0..points {
        let t0 = -8.0 * sd[0] + i as f64 * h[0];
        let w0 = if i == 0 || i == points - 1 { 0.5 } else { 1.0 };
        for j in 0..points {
            let t1 = -8.0 * sd[1] + j as f64 * h[1];
            let w1 = if j == 0 || j == points - 1 { 0.5 } else { 1.0 };
            let mut rss = 0.0;
            for (r, yr) in y.iter().enumerate() {
                let e = yr - a.get(r, 0) * t0 - a.get(r, 1) * t1;
                rss += e * e;
            }
            let loglik = -0.5 * n * (2.0 * PI * sigma2).ln() - 0.5 * rss / sigma2;
            let logprior = -(2.0 * PI).ln() - 0.5 * (c[0] * c[1]).ln() - 0.5 * (t0 * t0 / c[0] + t1 * t1 / c[1]);
            terms.push(loglik + logprior + (w0 * w1 * h[0] * h[1]).ln());
        }
    }
    log_sum_exp(&terms)
}

/// Trapezoid rule for ∫ exp(f) over [lo, hi] in log space.
pub fn trapezoid_log_integral(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> f64 {
    let h = (hi - lo) / (points - 1) as f64;
    let terms: Vec<f64> = (0..points)
        .map(|i| {
            let w = if i == 0 || i == points - 1 { 0.5 } else { 1.0 };
            f(lo + i as f64 * h) + (w * h).ln()
        })
        .collect();
    log_sum_exp(&terms)
}

/// Isotonic least squares by trying every split into contiguous blocks and
/// keeping the best feasible one (block means nondecreasing).
pub fn isotonic_exhaustive(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << (n - 1)) {
        let mut fitted = vec![0.0; n];
        let mut start = 0;
        let mut feasible = true;
        let mut prev = f64::NEG_INFINITY;
        for end in 1..=n {
            if end == n || mask & (1 << (end - 1)) != 0 {
                let w: f64 = weights[start..end].iter().sum();
                let m = (start..end).map(|i| weights[i] * values[i]).sum::<f64>() / w;
                if m < prev {
                    feasible = false;
                    break;
                }
                prev = m;
                fitted[start..end].fill(m);
                start = end;
            }
        }
        if !feasible {
            continue;
        }
        let sse: f64 = (0..n).map(|i| weights[i] * (values[i] - fitted[i]).powi(2)).sum();
        if best.as_ref().is_none_or(|(b, _)| sse < *b) {
            best = Some((sse, fitted));
        }
    }
    best.expect("the single-block partition is always feasible").1
}

/// `V*_j = max_{k ≤ j} min_{l ≥ j} Av(k, l)`.
pub fn isotonic_max_min(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let n = values.len();
    let av = |k: usize, l: usize| {
        let w: f64 = weights[k..=l].iter().sum();
        (k..=l).map(|i| weights[i] * values[i]).sum::<f64>() / w
    };
    (0..n)
        .map(|j| {
            (0..=j)
                .map(|k| (j..n).map(|l| av(k, l)).fold(f64::INFINITY, f64::min))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| normal(rng))
}
