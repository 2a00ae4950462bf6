use std::fs;
use std::path::Path;

use ppc::{AffinityConfig, KernelConfig, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F64,
    F32,
}

/// Everything a run needs, read from `--config` and then overridden by flags.
///
/// The master seed is `train.seed`; kernel centers, bandwidth sampling and
/// initial guesses all derive their own seeds from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub precision: Precision,
    pub affinity: AffinityConfig,
    pub train: TrainConfig,
    pub kernel: KernelConfig,
    pub output: OutputPaths,
}

/// Default artifact locations; command-line paths take precedence.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputPaths {
    pub model: Option<String>,
    pub codes: Option<String>,
    pub log: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            precision: Precision::F64,
            affinity: AffinityConfig::by_class(),
            train: TrainConfig::default(),
            kernel: KernelConfig::default(),
            output: OutputPaths::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(RunConfig::default()),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.affinity.validate()?;
        self.train.validate()?;
        self.kernel.validate()?;
        Ok(())
    }
}
