//! The JSON run configuration. Every section is optional and falls back to
//! the defaults below; unknown keys anywhere are rejected.

use std::path::{Path, PathBuf};

use ddlab::basis::BasisKind;
use ddlab::ebayes::{GammaPriorSchedule, PavaWeights};
use ddlab::linmodel::PriorSchedule;
use ddlab::risklab::{EvidenceOptions, GeneratorSpec, SweepConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub gen: GenSection,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub evidence: EvidenceSection,
    #[serde(default)]
    pub deaton: DeatonSection,
    #[serde(default)]
    pub occam: OccamSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            generator: GeneratorSpec::default(),
            gen: GenSection::default(),
            sweep: SweepConfig::default(),
            evidence: EvidenceSection::default(),
            deaton: DeatonSection::default(),
            occam: OccamSection::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenSection {
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvidenceSection {
    /// Dataset CSV written by `gen`; when set, `seeds` is ignored.
    pub dataset: Option<PathBuf>,
    pub seeds: Vec<u64>,
    pub degrees: Vec<usize>,
    pub prior: PriorSchedule,
    pub basis: BasisKind,
}

impl EvidenceSection {
    pub fn options(&self) -> EvidenceOptions {
        EvidenceOptions {
            prior: self.prior.clone(),
            basis: self.basis,
        }
    }
}

impl Default for EvidenceSection {
    fn default() -> Self {
        Self {
            dataset: None,
            seeds: (0..50).collect(),
            degrees: (0..20).collect(),
            prior: EvidenceOptions::default().prior,
            basis: EvidenceOptions::default().basis,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeatonSection {
    pub dataset: Option<PathBuf>,
    pub seed: u64,
    pub degree: usize,
    /// Gamma priors for `V_0 … V_{p+1}`; defaults to `γ_i = 1 + 0.1 i`, `β_i = 10`.
    pub schedule: Option<GammaPriorSchedule>,
    pub weights: PavaWeights,
}

impl Default for DeatonSection {
    fn default() -> Self {
        Self {
            dataset: None,
            seed: 0,
            degree: 10,
            schedule: None,
            weights: PavaWeights::Unit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HypothesisConfig {
    Arithmetic { bound: i64 },
    Cubic { max_numerator: i64, max_denominator: i64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OccamSection {
    pub data: Vec<i64>,
    pub hypotheses: Vec<HypothesisConfig>,
}

impl Default for OccamSection {
    fn default() -> Self {
        Self {
            data: vec![-1, 3, 7, 11],
            hypotheses: vec![
                HypothesisConfig::Arithmetic { bound: 50 },
                HypothesisConfig::Cubic {
                    max_numerator: 50,
                    max_denominator: 4,
                },
            ],
        }
    }
}

impl RunConfig {
    /// Parses a config document, reporting the failing field path and position.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::Config(format!(
                "at `{path}` (line {}, column {}): {inner}",
                inner.line(),
                inner.column()
            ))
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let field = |name: &str, e: ddlab::Error| CliError::Config(format!("{name}: {e}"));
        if self.version != CONFIG_VERSION {
            return Err(CliError::Config(format!(
                "version: unsupported config version {}, expected {CONFIG_VERSION}",
                self.version
            )));
        }
        self.generator.validate().map_err(|e| field("generator", e))?;
        self.sweep.validate().map_err(|e| field("sweep", e))?;
        if self.evidence.degrees.is_empty() {
            return Err(CliError::Config("evidence.degrees: empty degree list".into()));
        }
        if self.evidence.dataset.is_none() && self.evidence.seeds.is_empty() {
            return Err(CliError::Config("evidence.seeds: empty seed list and no dataset".into()));
        }
        self.evidence.prior.variances(1).map_err(|e| field("evidence.prior", e))?;
        if let Some(s) = &self.deaton.schedule {
            s.validate().map_err(|e| field("deaton.schedule", e))?;
        }
        if self.occam.data.len() < 2 {
            return Err(CliError::Config("occam.data: need at least 2 integers".into()));
        }
        if self.occam.hypotheses.is_empty() {
            return Err(CliError::Config("occam.hypotheses: empty list".into()));
        }
        if !matches!(self.evidence.basis, BasisKind::Legendre | BasisKind::DataOrthonormal) {
            return Err(CliError::Config("evidence.basis: must be legendre or data_orthonormal".into()));
        }
        for h in &self.occam.hypotheses {
            if let HypothesisConfig::Cubic { max_denominator, .. } = h {
                if *max_denominator < 1 {
                    return Err(CliError::Config("occam.hypotheses: max_denominator must be at least 1".into()));
                }
            }
        }
        Ok(())
    }
}
