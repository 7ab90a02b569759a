mod support;

use ddlab::basis::{legendre_design, Interval};
use ddlab::linmodel::{max_log_likelihood, GaussianLinearModel};
use ddlab::selection::{
    bayes_factor, bic, laplace_log_evidence, model_posterior, normalize_log_weights, ModelList,
};
use proptest::prelude::*;
use rand::Rng;
use support::{normal, oracle_rng, trapezoid_log_integral};

fn random_conjugate(seed: u64) -> (GaussianLinearModel, Vec<f64>) {
    let mut rng = oracle_rng(seed);
    let n = rng.random_range(3..=40usize);
    let k = rng.random_range(1..=10usize.min(n));
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let d = legendre_design(&x, k - 1, Interval::symmetric_unit()).unwrap();
    let c: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..3.0)).collect();
    let sigma2 = rng.random_range(0.05..2.0);
    let y = (0..n).map(|_| normal(&mut rng)).collect();
    (GaussianLinearModel::new(d, c, sigma2).unwrap(), y)
}

#[test]
fn laplace_is_exact_for_conjugate_models() {
    for seed in 0..20 {
        let (m, y) = random_conjugate(seed);
        let post = m.posterior(&y).unwrap();
        let lap = laplace_log_evidence(|t| m.log_joint(&y, t).unwrap(), &post.mean, 1e-4).unwrap();
        assert!((lap - post.log_evidence).abs() < 1e-6, "seed {seed}");
    }
}

#[test]
fn laplace_on_quartic_log_posterior() {
    let f = |t: f64| -t * t / 2.0 - t.powi(4) / 12.0;
    let truth = trapezoid_log_integral(f, -12.0, 12.0, 1_000_001);
    let lap = laplace_log_evidence(|t| f(t[0]), &[0.0], 1e-8).unwrap();
    // Laplace keeps only the curvature at the mode: √(2π) against ≈ 2.186.
    assert!((lap - (2.0 * std::f64::consts::PI).sqrt().ln()).abs() < 1e-6);
    let ratio = (lap - truth).exp();
    assert!((ratio - 1.0).abs() < 0.15, "ratio {ratio}");
    assert!(ratio > 1.0);
}

#[test]
fn bic_tracks_evidence_better_than_raw_likelihood_at_large_n() {
    let n = 200;
    let mut rng = oracle_rng(77);
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let d = legendre_design(&x, 3, Interval::symmetric_unit()).unwrap();
    let y: Vec<f64> = x.iter().map(|v| 0.5 + v - 0.7 * v * v + 0.2 * normal(&mut rng)).collect();
    let m = GaussianLinearModel::new(d.clone(), vec![1.0; 4], 0.04).unwrap();
    let ev = m.log_evidence(&y).unwrap();
    let mle = max_log_likelihood(d.matrix(), &y, 0.04).unwrap();
    assert!((ev - bic(mle, 4, n)).abs() < (ev - mle).abs());
}

#[test]
fn bic_and_evidence_agree_on_model_choice_as_n_grows() {
    // Nested Legendre models, true degree 2; compare argmaxes over 20 seeds.
    for &n in &[50usize, 200, 800] {
        let mut disagreements = 0;
        for seed in 0..20 {
            let mut rng = oracle_rng(1000 + seed);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = x.iter().map(|v| 1.0 - 2.0 * v * v + 0.5 * normal(&mut rng)).collect();
            let models = (0..6)
                .map(|deg| {
                    let d = legendre_design(&x, deg, Interval::symmetric_unit()).unwrap();
                    GaussianLinearModel::new(d, vec![1.0; deg + 1], 0.25).unwrap()
                })
                .collect();
            let r = model_posterior(&ModelList::uniform(models).unwrap(), &y).unwrap();
            if r.argmax_bic() != r.argmax_evidence() {
                disagreements += 1;
            }
        }
        if n >= 200 {
            assert!(disagreements <= 2, "n = {n}: {disagreements} disagreements");
        }
    }
}

#[test]
fn report_probabilities_sum_to_one() {
    let (m1, y) = random_conjugate(5);
    let d = legendre_design(m1.design().points(), 0, Interval::symmetric_unit()).unwrap();
    let m2 = GaussianLinearModel::new(d, vec![1.0], m1.noise_variance()).unwrap();
    let r = model_posterior(&ModelList::new(vec![m1, m2], vec![0.3, 0.7]).unwrap(), &y).unwrap();
    assert!((r.posterior_probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!((r.bic_posterior_probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    for m in &r.models {
        assert!((m.laplace_log_evidence - m.log_evidence).abs() < 1e-6);
    }
}

proptest! {
    #[test]
    fn normalization_shift_invariance(logs in prop::collection::vec(-50.0f64..50.0, 1..8), shift in -1e4f64..1e4) {
        let a = normalize_log_weights(&logs);
        let shifted: Vec<f64> = logs.iter().map(|l| l + shift).collect();
        let b = normalize_log_weights(&shifted);
        prop_assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn bayes_factors_are_reciprocal(seed in 0u64..1000) {
        let (m1, y) = random_conjugate(seed);
        let d = legendre_design(m1.design().points(), 0, Interval::symmetric_unit()).unwrap();
        let m2 = GaussianLinearModel::new(d, vec![2.0], m1.noise_variance()).unwrap();
        let r = model_posterior(&ModelList::uniform(vec![m1, m2]).unwrap(), &y).unwrap();
        let prod = bayes_factor(&r, 0, 1).unwrap() * bayes_factor(&r, 1, 0).unwrap();
        prop_assert!((prod - 1.0).abs() < 1e-12);
    }
}
