//! Run configuration: a TOML file with a `[dataset]` section and an
//! optional `[pipeline]` section. Unknown keys are rejected. Command-line
//! flags override file values.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use ideal_dnf::tabular::{default_missing_tokens, AttrKind, LoadOptions};
use ideal_dnf::{PipelineConfig, ScorerKind};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dataset: DatasetSection,
    #[serde(default)]
    pub pipeline: PipelineSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub path: PathBuf,
    pub target: String,
    #[serde(default)]
    pub positive_label: Option<String>,
    #[serde(default)]
    pub missing_tokens: Option<Vec<String>>,
    #[serde(default)]
    pub schema_hints: BTreeMap<String, String>,
    #[serde(default)]
    pub drop_columns: Vec<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSection {
    pub max_features: Option<usize>,
    pub tolerance_points: Option<f64>,
    pub validation_fraction: Option<f64>,
    pub scorers: Option<Vec<String>>,
    pub seed: Option<u64>,
}

fn parse_kind(name: &str, value: &str) -> Result<AttrKind, CliError> {
    match value {
        "numerical" => Ok(AttrKind::Numerical),
        "categorical" => Ok(AttrKind::Categorical),
        "boolean" => Ok(AttrKind::Boolean),
        other => Err(CliError::config(format!(
            "schema hint for '{name}': unknown kind '{other}' \
             (expected numerical, categorical, or boolean)"
        ))),
    }
}

impl FileConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::config(format!("cannot read config '{}': {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::config(format!("config '{}': {e}", path.display())))
    }

    pub fn load_options(&self) -> Result<LoadOptions, CliError> {
        let mut opts = LoadOptions::new(&self.dataset.target);
        opts.positive_label = self.dataset.positive_label.clone();
        if let Some(tokens) = &self.dataset.missing_tokens {
            opts.missing_tokens = tokens.iter().cloned().collect::<BTreeSet<String>>();
        } else {
            opts.missing_tokens = default_missing_tokens();
        }
        for (name, kind) in &self.dataset.schema_hints {
            opts.schema_hints.insert(name.clone(), parse_kind(name, kind)?);
        }
        opts.drop_columns = self.dataset.drop_columns.iter().cloned().collect();
        Ok(opts)
    }

    /// Pipeline configuration with the file's values, the given seed
    /// override applied last.
    pub fn pipeline_config(&self, seed_override: Option<u64>) -> Result<PipelineConfig, CliError> {
        let mut cfg = PipelineConfig::default();
        let section = &self.pipeline;
        if let Some(v) = section.max_features {
            cfg.max_features = v;
        }
        if let Some(v) = section.tolerance_points {
            cfg.tolerance_points = v;
        }
        if let Some(v) = section.validation_fraction {
            cfg.validation_fraction = v;
        }
        if let Some(names) = &section.scorers {
            cfg.scorers = names
                .iter()
                .map(|n| ScorerKind::from_name(n).map_err(CliError::from))
                .collect::<Result<_, _>>()?;
        }
        if let Some(v) = section.seed {
            cfg.seed = v;
        }
        if let Some(v) = seed_override {
            cfg.seed = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
