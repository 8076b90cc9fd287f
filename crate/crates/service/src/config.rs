//! Service configuration: one TOML file, every key optional.
//!
//! ```toml
//! host = "127.0.0.1"
//! port = 8080
//! corpus_root = "corpora"
//! models = "models/stts.json"
//! tagset = "stts"
//! max_increment_span = 30
//!
//! [thresholds]
//! pos = 2.302585092994046
//! label = 2.302585092994046
//! category = 2.302585092994046
//! structure = 2.302585092994046
//! ```
//!
//! `ARGBANK_PORT` and `ARGBANK_CORPUS_ROOT` override the file. Relative
//! `models` and `corpus_root` paths are taken as given (relative to the
//! working directory).

use std::path::{Path, PathBuf};

use argbank_models::pos::DEFAULT_THRESHOLD;
use serde::{Deserialize, Serialize};

pub const PORT_VAR: &str = "ARGBANK_PORT";
pub const CORPUS_ROOT_VAR: &str = "ARGBANK_CORPUS_ROOT";

/// Reliability thresholds: minimal log-probability gaps between the best
/// and the runner-up decision. Below the gap a decision is flagged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub pos: f64,
    pub label: f64,
    pub category: f64,
    /// For the internal structure proposed by the chunker.
    pub structure: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            pos: DEFAULT_THRESHOLD,
            label: DEFAULT_THRESHOLD,
            category: DEFAULT_THRESHOLD,
            structure: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Address to listen on.
    pub host: String,
    pub port: u16,
    /// Directory that corpus paths in requests are resolved against.
    pub corpus_root: PathBuf,
    /// Model container; without one, increments cannot be proposed.
    pub models: Option<PathBuf>,
    /// Tagset the model container must have been trained for.
    pub tagset: String,
    /// Largest token extent an increment may cover.
    pub max_increment_span: usize,
    pub thresholds: Thresholds,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            host: "127.0.0.1".to_owned(),
            port: 8080,
            corpus_root: PathBuf::from("."),
            models: None,
            tagset: argbank_core::export::DEFAULT_TAGSET.to_owned(),
            max_increment_span: 30,
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Syntax(String),
    #[error("invalid value for {name}: `{value}`")]
    Env { name: &'static str, value: String },
    #[error("{0}")]
    Value(String),
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Config, ConfigError> {
        let c: Config = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        c.check()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Config::from_toml(&text)
    }

    /// Applies the environment overrides, read through `var`.
    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(v) = var(PORT_VAR) {
            self.port = v.trim().parse().map_err(|_| ConfigError::Env {
                name: PORT_VAR,
                value: v.clone(),
            })?;
        }
        if let Some(v) = var(CORPUS_ROOT_VAR) {
            if v.is_empty() {
                return Err(ConfigError::Env {
                    name: CORPUS_ROOT_VAR,
                    value: v,
                });
            }
            self.corpus_root = PathBuf::from(v);
        }
        Ok(())
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if self.max_increment_span == 0 {
            return Err(ConfigError::Value("max_increment_span must be positive".into()));
        }
        let t = self.thresholds;
        for (name, v) in [
            ("pos", t.pos),
            ("label", t.label),
            ("category", t.category),
            ("structure", t.structure),
        ] {
            if v.is_nan() || v < 0.0 {
                return Err(ConfigError::Value(format!("threshold {name} must be non-negative")));
            }
        }
        Ok(())
    }
}
