use std::path::{Path, PathBuf};

use serde::Deserialize;
use subset_evidence::{DatumKind, Hypothesis64, ModelKind};

use crate::error::CliError;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// The experiment file: hypotheses plus optional numeric settings.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub hypotheses: Vec<HypothesisSpec>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub d_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct HypothesisSpec {
    pub name: String,
    #[serde(flatten)]
    pub model: ModelSpec,
    #[serde(default)]
    pub prior: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ModelSpec {
    SimpleCategorical {
        probabilities: Vec<f64>,
    },
    SimpleGaussian {
        mean: f64,
        std_dev: f64,
    },
    BetaBernoulli {
        alpha: f64,
        beta: f64,
    },
    DirichletCategorical {
        concentration: Vec<f64>,
    },
    NormalKnownVariance {
        variance: f64,
        prior_mean: f64,
        prior_variance: f64,
    },
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::SimpleCategorical { .. } => ModelKind::SimpleCategorical,
            ModelSpec::SimpleGaussian { .. } => ModelKind::SimpleGaussian,
            ModelSpec::BetaBernoulli { .. } => ModelKind::BetaBernoulli,
            ModelSpec::DirichletCategorical { .. } => ModelKind::DirichletCategorical,
            ModelSpec::NormalKnownVariance { .. } => ModelKind::NormalKnownVariance,
        }
    }
}

impl HypothesisSpec {
    pub fn build(&self) -> subset_evidence::Result<Hypothesis64> {
        let name = self.name.as_str();
        match &self.model {
            ModelSpec::SimpleCategorical { probabilities } => {
                Hypothesis64::simple_categorical(name, probabilities.clone())
            }
            ModelSpec::SimpleGaussian { mean, std_dev } => {
                Hypothesis64::simple_gaussian(name, *mean, *std_dev)
            }
            ModelSpec::BetaBernoulli { alpha, beta } => {
                Hypothesis64::beta_bernoulli(name, *alpha, *beta)
            }
            ModelSpec::DirichletCategorical { concentration } => {
                Hypothesis64::dirichlet_categorical(name, concentration.clone())
            }
            ModelSpec::NormalKnownVariance {
                variance,
                prior_mean,
                prior_variance,
            } => Hypothesis64::normal_known_variance(name, *variance, *prior_mean, *prior_variance),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text).map_err(|message| CliError::Config {
            path: path.to_owned(),
            message,
        })
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let config: Config = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if config.hypotheses.is_empty() {
            return Err("no hypotheses configured".into());
        }
        Ok(config)
    }

    /// Whether any hypothesis reads real-valued data.
    pub fn wants_reals(&self) -> bool {
        self.hypotheses
            .iter()
            .any(|h| h.model.kind().data_kind() == DatumKind::Real)
    }

    pub fn hypotheses(&self) -> Result<Vec<Hypothesis64>, CliError> {
        Ok(self
            .hypotheses
            .iter()
            .map(HypothesisSpec::build)
            .collect::<subset_evidence::Result<_>>()?)
    }

    /// Priors in configuration order; all must be present.
    pub fn priors(&self, path: &Path) -> Result<Vec<f64>, CliError> {
        self.hypotheses
            .iter()
            .map(|h| {
                h.prior.ok_or_else(|| CliError::Config {
                    path: PathBuf::from(path),
                    message: format!("hypothesis `{}` has no prior", h.name),
                })
            })
            .collect()
    }
}
