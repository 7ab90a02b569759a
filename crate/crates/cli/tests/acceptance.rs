//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ddlab::basis::{data_orthonormal_design_on, legendre_design, Interval};
use ddlab::ebayes::{
    deaton_fit, induced_prior_variances, joint_hyper_gradient, joint_hyper_loglik, pava, shrinkage_posterior_means,
    CoefficientStats, GammaPriorSchedule,
};
use ddlab::linmodel::{conjugate_posterior, GaussianLinearModel};
use ddlab::risklab::{
    double_descent_sweep, evidence_sweep, generate, paired_median_difference_bound, EvidenceOptions, GeneratorSpec,
    RiskCurvePoint, SweepConfig,
};
use ddlab::selection::{argmax, discrete_evidence, integers, laplace_log_evidence, ArithmeticHypothesis};
use rand::Rng;
use sha2::{Digest, Sha256};
use support::{isotonic_exhaustive, isotonic_max_min, normal, oracle_rng, quadrature_log_evidence_2d, random_matrix};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    o.detail = format!("{}; {:.3?} (limit {:?})", o.detail, elapsed, limit);
    o.pass &= elapsed < limit;
    o
}

fn criterion_1() -> Outcome {
    timed(Duration::from_millis(1), || {
        let ev = discrete_evidence(&ArithmeticHypothesis::default(), &integers(&[-1, 3, 7, 11]));
        let pass = ev.count == 1 && ev.grid_size == 10_201 && (ev.value() - 0.000098).abs() < 5e-7;
        outcome(pass, format!("count {} / grid {} = {:.7}", ev.count, ev.grid_size, ev.value()))
    })
}

fn criterion_2() -> Outcome {
    timed(Duration::from_secs(5), || {
        let mut worst: f64 = 0.0;
        for seed in 0..50 {
            let mut rng = oracle_rng(2000 + seed);
            let n = rng.random_range(2..=40usize);
            let p = rng.random_range(0..=10usize.min(n - 1));
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let design = legendre_design(&x, p, Interval::symmetric_unit()).unwrap();
            let c: Vec<f64> = (0..=p).map(|_| rng.random_range(0.1..4.0)).collect();
            let sigma2 = rng.random_range(0.01..2.0);
            let y: Vec<f64> = (0..n).map(|_| 2.0 * normal(&mut rng)).collect();
            let m = GaussianLinearModel::new(design, c, sigma2).unwrap();
            let post = m.posterior(&y).unwrap();
            let lap = laplace_log_evidence(|t| m.log_joint(&y, t).unwrap(), &post.mean, 1e-4).unwrap();
            worst = worst.max((lap - post.log_evidence).abs());
        }
        outcome(worst < 1e-6, format!("max |laplace - exact| = {worst:.3e} over 50 models"))
    })
}

fn criterion_3() -> Outcome {
    timed(Duration::from_secs(30), || {
        let mut worst: f64 = 0.0;
        for seed in 0..20 {
            let mut rng = oracle_rng(3000 + seed);
            let n = rng.random_range(1..=8);
            let a = random_matrix(&mut rng, n, 2);
            let c: [f64; 2] = [rng.random_range(0.5..2.0), rng.random_range(0.5..2.0)];
            let sigma2: f64 = rng.random_range(0.5..2.0);
            let theta = [c[0].sqrt() * normal(&mut rng), c[1].sqrt() * normal(&mut rng)];
            let y: Vec<f64> = (0..n)
                .map(|i| a.get(i, 0) * theta[0] + a.get(i, 1) * theta[1] + sigma2.sqrt() * normal(&mut rng))
                .collect();
            let exact = conjugate_posterior(&a, &c, sigma2, &y).unwrap().log_evidence;
            let quad = quadrature_log_evidence_2d(&a, c, sigma2, &y, 400);
            worst = worst.max((quad - exact).exp_m1().abs());
        }
        outcome(worst < 1e-6, format!("max relative evidence error = {worst:.3e} over 20 instances"))
    })
}

fn criterion_4() -> Outcome {
    timed(Duration::from_secs(10), || {
        let mut rng = oracle_rng(4000);
        let (mut worst_oracle, mut worst_idem, mut worst_maxmin): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for _ in 0..1000 {
            let n = rng.random_range(1..=6);
            let values: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..5.0)).collect();
            let fit = pava(&values, &weights).unwrap().fitted;
            let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
            worst_oracle = worst_oracle.max(diff(&fit, &isotonic_exhaustive(&values, &weights)));
            worst_idem = worst_idem.max(diff(&fit, &pava(&fit, &weights).unwrap().fitted));
            worst_maxmin = worst_maxmin.max(diff(&fit, &isotonic_max_min(&values, &weights)));
        }
        outcome(
            worst_oracle < 1e-10 && worst_idem < 1e-10 && worst_maxmin < 1e-10,
            format!("oracle {worst_oracle:.1e}, idempotence {worst_idem:.1e}, max-min {worst_maxmin:.1e}"),
        )
    })
}

fn sweep() -> (Vec<RiskCurvePoint>, Duration) {
    let config = SweepConfig {
        complexities: (2..=80).collect(),
        replicates: 100,
        seed: 20_240_501,
        ..SweepConfig::default()
    };
    let start = Instant::now();
    let points = double_descent_sweep(&GeneratorSpec::default(), &config).unwrap();
    (points, start.elapsed())
}

fn criterion_5(points: &[RiskCurvePoint], elapsed: Duration) -> Outcome {
    let at = |c: usize| points.iter().find(|p| p.complexity == c).unwrap();
    let (r10, r20, r80) = (
        at(10).test_risk_mle.median,
        at(20).test_risk_mle.median,
        at(80).test_risk_mle.median,
    );
    let train = points
        .iter()
        .filter(|p| p.complexity >= 20)
        .map(|p| p.train_mse_max)
        .fold(0.0, f64::max);
    let limit = Duration::from_secs(120);
    outcome(
        r20 > r10 && r20 > r80 && train < 1e-12 && elapsed < limit,
        format!(
            "median risk c=10 {r10:.4}, c=20 {r20:.1}, c=80 {r80:.4}; max train_mse (c>=20) {train:.1e}; {elapsed:.3?} (limit {limit:?})"
        ),
    )
}

fn criterion_6(points: &[RiskCurvePoint]) -> Outcome {
    let p = points.iter().find(|p| p.complexity == 20).unwrap();
    let finite = p.test_risk_bayes.samples.iter().all(|v| v.is_finite());
    let bound =
        paired_median_difference_bound(&p.test_risk_bayes.samples, &p.test_risk_mle.samples, 4000, 0.95, 6).unwrap();
    outcome(
        finite && bound < 0.0,
        format!(
            "median bayes {:.4} vs min-norm {:.1}; 95% upper bound of difference {bound:.3}",
            p.test_risk_bayes.median, p.test_risk_mle.median
        ),
    )
}

fn criterion_7() -> Outcome {
    let degrees: Vec<usize> = (0..20).collect();
    let mut argmaxes: Vec<usize> = (0..50)
        .map(|seed| {
            let d = generate(&GeneratorSpec::default(), seed).unwrap();
            let curve = evidence_sweep(&d, &degrees, &EvidenceOptions::default()).unwrap();
            curve[argmax(curve.iter().map(|p| p.log_evidence))].degree
        })
        .collect();
    argmaxes.sort_unstable();
    let median = 0.5 * (argmaxes[24] + argmaxes[25]) as f64;
    outcome(
        (median - 10.0).abs() <= 2.0,
        format!("median argmax degree {median} over 50 seeds (range {}..{})", argmaxes[0], argmaxes[49]),
    )
}

fn criterion_8() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let mut rng = oracle_rng(8000 + seed);
        let spec = GeneratorSpec {
            true_degree: rng.random_range(0..12),
            ..GeneratorSpec::default()
        };
        let d = generate(&spec, seed).unwrap();
        let degree = rng.random_range(0..18);
        let q = data_orthonormal_design_on(&d.x, degree, d.spec.domain).unwrap();
        let stats = CoefficientStats::from_design(&q, &d.y).unwrap();
        let fit = deaton_fit(&stats, &GammaPriorSchedule::default_for(degree + 1)).unwrap();
        let shrunk = shrinkage_posterior_means(&stats, &fit);
        let post = conjugate_posterior(q.matrix(), &induced_prior_variances(&fit), fit.sigma2_hat, &d.y).unwrap();
        for (a, b) in shrunk.iter().zip(&post.mean) {
            worst = worst.max((a - b).abs());
        }
    }
    outcome(worst < 1e-10, format!("max |shrunk - posterior mean| = {worst:.3e} over 100 fits"))
}

fn criterion_9() -> Outcome {
    let mut worst: f64 = 0.0;
    let h = 1e-6;
    for seed in 0..100 {
        let mut rng = oracle_rng(9000 + seed);
        let k = rng.random_range(1..=10);
        let theta: Vec<f64> = (0..k).map(|_| 2.0 * normal(&mut rng)).collect();
        let n = k + rng.random_range(1..=20);
        let stats = CoefficientStats::new(theta, rng.random_range(0.1..10.0), n).unwrap();
        let z: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..0.95)).collect();
        let sigma2: f64 = rng.random_range(0.1..5.0);
        let g = joint_hyper_gradient(&stats, &z, sigma2).unwrap();
        for j in 0..=k {
            let eval = |delta: f64| {
                let mut zz = z.clone();
                let mut s = sigma2;
                if j < k {
                    zz[j] += delta;
                } else {
                    s += delta;
                }
                joint_hyper_loglik(&stats, &zz, s).unwrap()
            };
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            worst = worst.max((fd - g[j]).abs());
        }
    }
    outcome(worst < 1e-6, format!("max |analytic - central difference| = {worst:.3e} over 100 points"))
}

fn hash_dir(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let bytes = std::fs::read(&path).unwrap();
        let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        out.insert(path.file_name().unwrap().to_string_lossy().into_owned(), digest);
    }
    out
}

fn criterion_10() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let config = root.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"version": 1,
            "gen": {"seed": 17},
            "sweep": {"complexities": [2, 6, 10, 15, 19, 20, 21, 25, 40, 60], "replicates": 20, "seed": 3},
            "evidence": {"seeds": [0, 1, 2, 3, 4], "degrees": [0, 2, 4, 6, 8, 10, 12, 14]},
            "deaton": {"degree": 9, "seed": 4}}"#,
    )
    .unwrap();
    let mut details = Vec::new();
    let mut pass = true;
    for command in ["gen", "sweep", "evidence", "deaton", "occam"] {
        let mut hashes = Vec::new();
        for run in 0..2 {
            let out = root.path().join(format!("{command}-{run}"));
            let status = Command::new(env!("CARGO_BIN_EXE_ddlab"))
                .args([command, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
                .args(["--svg", "--verify"])
                .output()
                .unwrap();
            pass &= status.status.success();
            hashes.push(hash_dir(&out));
        }
        let same = hashes[0] == hashes[1] && !hashes[0].is_empty();
        pass &= same;
        details.push(format!("{command}: {} file(s) {}", hashes[0].len(), if same { "identical" } else { "DIFFER" }));
    }
    outcome(pass, details.join(", "))
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "Occam exact value", criterion_1()),
        (2, "Laplace exact for Gaussians", criterion_2()),
        (3, "quadrature oracle", criterion_3()),
        (4, "PAVA oracle equivalence", criterion_4()),
    ];
    let (points, elapsed) = sweep();
    results.push((5, "double-descent shape", criterion_5(&points, elapsed)));
    results.push((6, "prior-driven finiteness at threshold", criterion_6(&points)));
    results.push((7, "evidence peak", criterion_7()));
    results.push((8, "shrinkage identity", criterion_8()));
    results.push((9, "hyperparameter gradient", criterion_9()));
    results.push((10, "CLI determinism", criterion_10()));

    let mut failed = 0;
    for (n, name, o) in &results {
        println!("{} criterion {n:>2} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
