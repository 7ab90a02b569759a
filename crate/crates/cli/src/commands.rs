use std::path::{Path, PathBuf};

use ddlab::basis::data_orthonormal_design_on;
use ddlab::ebayes::{
    deaton_fit_weighted, induced_prior_variances, shrinkage_posterior_means, CoefficientStats, GammaPriorSchedule,
};
use ddlab::linmodel::conjugate_posterior;
use ddlab::risklab::{double_descent_sweep, evidence_sweep, generate, Dataset, GeneratorSpec};
use ddlab::selection::{
    argmax, discrete_evidence, integers, ArithmeticHypothesis, CubicHypothesis, DiscreteHypothesis,
};
use serde::{Deserialize, Serialize};

use crate::config::{HypothesisConfig, RunConfig};
use crate::svg::{LinePlot, Series};
use crate::table::{Cell, CsvTable};
use crate::CliError;

#[derive(Debug, Clone)]
pub struct Options {
    pub out: PathBuf,
    pub svg: bool,
    pub verify: bool,
}

impl Options {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// JSON written next to a dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    pub seed: u64,
    pub spec: GeneratorSpec,
    pub true_coefficients: Vec<f64>,
}

pub fn dataset_table(d: &Dataset) -> CsvTable {
    let mut t = CsvTable::new(&["x", "y", "f_true"]);
    for i in 0..d.x.len() {
        t.push(vec![d.x[i].into(), d.y[i].into(), d.f_true_at_x[i].into()]);
    }
    t
}

/// Reads a dataset CSV and its `.json` sidecar.
pub fn load_dataset(csv_path: &Path) -> Result<Dataset, CliError> {
    let meta_path = csv_path.with_extension("json");
    let text = std::fs::read_to_string(&meta_path).map_err(|e| CliError::io(&meta_path, e))?;
    let meta: DatasetMeta = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", meta_path.display())))?;
    let mut reader = csv::Reader::from_path(csv_path).map_err(|e| CliError::Config(format!("{}: {e}", csv_path.display())))?;
    let (mut x, mut y, mut f) = (Vec::new(), Vec::new(), Vec::new());
    for record in reader.deserialize::<(f64, f64, f64)>() {
        let (a, b, c) = record.map_err(|e| CliError::Config(format!("{}: {e}", csv_path.display())))?;
        x.push(a);
        y.push(b);
        f.push(c);
    }
    let mut spec = meta.spec;
    spec.n = x.len();
    Ok(Dataset {
        x,
        y,
        f_true_at_x: f,
        coefficients: meta.true_coefficients,
        spec,
        seed: meta.seed,
    })
}

pub fn cmd_gen(config: &RunConfig, opts: &Options) -> Result<Vec<PathBuf>, CliError> {
    let d = generate(&config.generator, config.gen.seed)?;
    let csv_path = opts.path("dataset.csv");
    dataset_table(&d).write(&csv_path)?;
    let meta = DatasetMeta {
        seed: d.seed,
        spec: d.spec.clone(),
        true_coefficients: d.coefficients.clone(),
    };
    let json_path = opts.path("dataset.json");
    write_text(&json_path, &(serde_json::to_string_pretty(&meta).expect("serializable") + "\n"))?;
    Ok(vec![csv_path, json_path])
}

pub fn cmd_sweep(config: &RunConfig, opts: &Options) -> Result<Vec<PathBuf>, CliError> {
    let points = double_descent_sweep(&config.generator, &config.sweep)?;
    let mut t = CsvTable::new(&[
        "complexity",
        "train_mse",
        "test_risk_mle",
        "test_risk_mle_se",
        "test_risk_bayes",
        "test_risk_bayes_se",
        "log_evidence",
        "bic",
        "replicates",
    ]);
    for p in &points {
        t.push(vec![
            p.complexity.into(),
            p.train_mse.into(),
            p.test_risk_mle.mean.into(),
            p.test_risk_mle.std_error.into(),
            p.test_risk_bayes.mean.into(),
            p.test_risk_bayes.std_error.into(),
            p.log_evidence.into(),
            p.bic.into(),
            p.replicates.into(),
        ]);
    }
    let csv_path = opts.path("risk_curve.csv");
    t.write(&csv_path)?;
    let mut written = vec![csv_path];
    if opts.svg {
        let series = |name: &str, f: &dyn Fn(&ddlab::risklab::RiskCurvePoint) -> f64| Series {
            name: name.into(),
            points: points.iter().map(|p| (p.complexity as f64, f(p))).collect(),
        };
        let plot = LinePlot {
            title: format!("Test risk, N = {}", config.generator.n),
            x_label: "complexity (columns)".into(),
            y_label: "test risk (log scale)".into(),
            log_y: true,
            series: vec![
                series("min-norm mean", &|p| p.test_risk_mle.mean),
                series("min-norm median", &|p| p.test_risk_mle.median),
                series("bayes mean", &|p| p.test_risk_bayes.mean),
            ],
        };
        let svg_path = opts.path("risk_curve.svg");
        write_text(&svg_path, &plot.render())?;
        written.push(svg_path);
    }
    Ok(written)
}

fn median_usize(values: &[usize]) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable();
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m] as f64
    } else {
        0.5 * (v[m - 1] + v[m]) as f64
    }
}

#[derive(Debug, Serialize)]
struct SeedArgmax {
    seed: u64,
    degree: usize,
}

#[derive(Debug, Serialize)]
struct EvidenceSummary {
    argmax_by_seed: Vec<SeedArgmax>,
    median_argmax_degree: f64,
}

pub fn cmd_evidence(config: &RunConfig, opts: &Options) -> Result<Vec<PathBuf>, CliError> {
    let section = &config.evidence;
    let datasets: Vec<Dataset> = match &section.dataset {
        Some(p) => vec![load_dataset(p)?],
        None => {
            if let Some(d) = section.degrees.iter().find(|d| **d >= config.generator.n) {
                return Err(CliError::Config(format!(
                    "evidence.degrees: degree {d} needs more than N = {} observations",
                    config.generator.n
                )));
            }
            section
                .seeds
                .iter()
                .map(|s| generate(&config.generator, *s))
                .collect::<Result<_, _>>()?
        }
    };
    let options = section.options();
    let mut t = CsvTable::new(&["seed", "degree", "log_evidence", "bic", "laplace_log_evidence", "argmax"]);
    let mut argmaxes = Vec::new();
    let mut first_curve = None;
    for d in &datasets {
        let curve = evidence_sweep(d, &section.degrees, &options)?;
        let best = argmax(curve.iter().map(|p| p.log_evidence));
        argmaxes.push(SeedArgmax {
            seed: d.seed,
            degree: curve[best].degree,
        });
        for (i, p) in curve.iter().enumerate() {
            t.push(vec![
                d.seed.into(),
                p.degree.into(),
                p.log_evidence.into(),
                p.bic.into(),
                p.laplace_log_evidence.into(),
                usize::from(i == best).into(),
            ]);
        }
        first_curve.get_or_insert(curve);
    }
    let csv_path = opts.path("evidence_curve.csv");
    t.write(&csv_path)?;
    let degrees: Vec<usize> = argmaxes.iter().map(|a| a.degree).collect();
    let summary = EvidenceSummary {
        median_argmax_degree: median_usize(&degrees),
        argmax_by_seed: argmaxes,
    };
    let json_path = opts.path("evidence_summary.json");
    write_text(&json_path, &(serde_json::to_string_pretty(&summary).expect("serializable") + "\n"))?;
    let mut written = vec![csv_path, json_path];
    if opts.svg {
        let curve = first_curve.expect("at least one dataset");
        let series = |name: &str, f: &dyn Fn(&ddlab::risklab::EvidencePoint) -> f64| Series {
            name: name.into(),
            points: curve.iter().map(|p| (p.degree as f64, f(p))).collect(),
        };
        let plot = LinePlot {
            title: format!("Log evidence by degree (seed {})", datasets[0].seed),
            x_label: "polynomial degree".into(),
            y_label: "log p(y | degree)".into(),
            log_y: false,
            series: vec![
                series("exact", &|p| p.log_evidence),
                series("laplace", &|p| p.laplace_log_evidence),
                series("bic", &|p| p.bic),
            ],
        };
        let svg_path = opts.path("evidence_curve.svg");
        write_text(&svg_path, &plot.render())?;
        written.push(svg_path);
    }
    Ok(written)
}

fn format_blocks(blocks: &[std::ops::Range<usize>]) -> String {
    blocks
        .iter()
        .map(|b| {
            if b.len() == 1 {
                b.start.to_string()
            } else {
                format!("{}-{}", b.start, b.end - 1)
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn cmd_deaton(config: &RunConfig, opts: &Options) -> Result<Vec<PathBuf>, CliError> {
    let section = &config.deaton;
    let d = match &section.dataset {
        Some(p) => load_dataset(p)?,
        None => generate(&config.generator, section.seed)?,
    };
    let (n, k) = (d.x.len(), section.degree + 1);
    if n <= k {
        return Err(CliError::Config(format!(
            "deaton.degree: residual degrees of freedom N - (p+1) = {n} - {k} must be positive (need N > p+1)"
        )));
    }
    let design = data_orthonormal_design_on(&d.x, section.degree, d.spec.domain)?;
    let stats = CoefficientStats::from_design(&design, &d.y)?;
    let schedule = section
        .schedule
        .clone()
        .unwrap_or_else(|| GammaPriorSchedule::default_for(k));
    let fit = deaton_fit_weighted(&stats, &schedule, section.weights)?;
    let shrunk = shrinkage_posterior_means(&stats, &fit);

    let mut t = CsvTable::new(&["index", "theta_hat", "v_unconstrained", "v_isotonic", "z", "shrunk_coefficient"]);
    for i in 0..k {
        t.push(vec![
            i.into(),
            stats.theta_hat[i].into(),
            fit.v_unconstrained[i].into(),
            fit.v_isotonic[i].into(),
            fit.z[i].into(),
            shrunk[i].into(),
        ]);
    }
    t.push(vec![
        k.into(),
        Cell::Empty,
        fit.v_unconstrained[k].into(),
        fit.v_isotonic[k].into(),
        Cell::Empty,
        Cell::Empty,
    ]);
    t.comment(format!("sigma2_hat={}", crate::table::format_f64(fit.sigma2_hat)));
    t.comment(format!("s={}", crate::table::format_f64(stats.s)));
    t.comment(format!("d={}", stats.d));
    t.comment(format!("pool_blocks={}", format_blocks(&fit.pool_blocks)));

    if opts.verify {
        let prior = induced_prior_variances(&fit);
        let post = conjugate_posterior(design.matrix(), &prior, fit.sigma2_hat, &d.y)?;
        let diff = post.mean.iter().zip(&shrunk).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if !(diff <= 1e-10) {
            return Err(CliError::Verify(format!(
                "shrunk coefficients differ from conjugate posterior means by {diff:e}"
            )));
        }
        t.comment(format!("verify_max_abs_diff={}", crate::table::format_f64(diff)));
    }
    let csv_path = opts.path("deaton_fit.csv");
    t.write(&csv_path)?;
    Ok(vec![csv_path])
}

pub fn cmd_occam(config: &RunConfig, opts: &Options) -> Result<Vec<PathBuf>, CliError> {
    let data = integers(&config.occam.data);
    let hypotheses: Vec<Box<dyn DiscreteHypothesis>> = config
        .occam
        .hypotheses
        .iter()
        .map(|h| -> Box<dyn DiscreteHypothesis> {
            match h {
                HypothesisConfig::Arithmetic { bound } => Box::new(ArithmeticHypothesis::new(*bound)),
                HypothesisConfig::Cubic {
                    max_numerator,
                    max_denominator,
                } => Box::new(CubicHypothesis::new(*max_numerator, *max_denominator)),
            }
        })
        .collect();
    let evidences: Vec<_> = hypotheses.iter().map(|h| discrete_evidence(h.as_ref(), &data)).collect();
    let total: f64 = evidences.iter().map(|e| e.value()).sum();
    let mut t = CsvTable::new(&["name", "count", "grid_size", "evidence", "posterior", "bayes_factor"]);
    for (h, e) in hypotheses.iter().zip(&evidences) {
        t.push(vec![
            h.name().into(),
            e.count.into(),
            e.grid_size.into(),
            e.value().into(),
            (e.value() / total).into(),
            (e.value() / evidences[0].value()).into(),
        ]);
    }
    let csv_path = opts.path("occam.csv");
    t.write(&csv_path)?;
    Ok(vec![csv_path])
}
