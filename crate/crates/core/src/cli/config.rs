//! Model configuration file (TOML).
//!
//! ```toml
//! links = ["logit", "probit", "cloglog", "cauchit"]
//! format = "text"
//! max_iter = 100
//! seed = 2019
//!
//! [response]
//! successes = "malnourished"
//! trials = "children"
//!
//! [[variables]]
//! name = "anc"
//! label = "Antenatal care (ANC)"
//! levels = ["No", "Yes"]
//! reference = "No"
//! ```

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::design::VariableSpec;
use crate::error::{Error, Result};
use crate::glm::FitOptions;
use crate::links::LinkKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format `{other}` (text, csv or json)"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Text => "text",
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseColumns {
    pub successes: String,
    pub trials: String,
}

/// Defaults for the `simulate` subcommand.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub rows: Option<usize>,
    pub group_size: Option<u64>,
    /// True coefficients, intercept first, in design column order.
    pub truth: Option<Vec<f64>>,
}

fn default_links() -> Vec<LinkKind> {
    LinkKind::ALL.to_vec()
}

fn default_max_iter() -> usize {
    FitOptions::default().max_iter
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub response: ResponseColumns,
    pub variables: Vec<VariableSpec>,
    #[serde(default = "default_links")]
    pub links: Vec<LinkKind>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub simulate: Option<SimulateConfig>,
}

impl ModelConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ModelConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
        Self::from_toml(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.response;
        if r.successes.trim().is_empty() || r.trials.trim().is_empty() {
            return Err(Error::Config("response column names must be non-empty".into()));
        }
        if r.successes == r.trials {
            return Err(Error::Config("response successes and trials columns must differ".into()));
        }
        if self.variables.is_empty() {
            return Err(Error::Config("at least one variable is required".into()));
        }
        if self.links.is_empty() {
            return Err(Error::Config("at least one link is required".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        let mut seen = HashSet::new();
        for v in &self.variables {
            v.validate()?;
            if v.name == r.successes || v.name == r.trials {
                return Err(Error::Config(format!("variable `{}` reuses a response column", v.name)));
            }
            if !seen.insert(v.name.as_str()) {
                return Err(Error::Config(format!("variable `{}` declared twice", v.name)));
            }
        }
        Ok(())
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            max_iter: self.max_iter,
            ..FitOptions::default()
        }
    }

    /// Number of design columns implied by the variables, intercept included.
    pub fn design_width(&self) -> usize {
        1 + self.variables.iter().map(|v| v.levels.len() - 1).sum::<usize>()
    }
}
