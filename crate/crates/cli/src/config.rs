//! Run configuration: an engine config in JSON whose optimizers may be given
//! by preset name, plus output locations.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "opt1": "de-f05",
//!   "opt2": {"algorithm": "de", "f": 0.3, "cr": 0.9, "population_size": 20, "budget": 500},
//!   "budget": 200,
//!   "population_size": 20,
//!   "max_generations": 50,
//!   "output": {"archive": "archive.json", "progress": "progress.csv", "heatmaps": true}
//! }
//! ```
//!
//! Every other key is an [`EngineConfig`] field. `budget`, when present,
//! overrides the evaluation budget of both optimizers.

use std::fs;
use std::path::{Path, PathBuf};

use benchgen::engine::EngineConfig;
use benchgen::optim::{OptimizerConfig, PRESET_NAMES};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OptimizerSpec {
    Preset(String),
    Inline(OptimizerConfig),
}

/// Resolves a preset name or an inline JSON optimizer description.
pub fn parse_optimizer(text: &str) -> Result<OptimizerConfig, CliError> {
    let text = text.trim();
    if text.starts_with('{') {
        let cfg: OptimizerConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Usage(format!("invalid optimizer {text}: {e}")))?;
        return checked(cfg);
    }
    preset(text)
}

fn preset(name: &str) -> Result<OptimizerConfig, CliError> {
    OptimizerConfig::preset(name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown optimizer preset {name:?} (known: {})",
            PRESET_NAMES.join(", ")
        ))
    })
}

fn checked(cfg: OptimizerConfig) -> Result<OptimizerConfig, CliError> {
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub archive: PathBuf,
    pub progress: PathBuf,
    /// Also write `heatmap_layer0.csv` and `heatmap_layer1.csv`.
    pub heatmaps: bool,
}

impl Default for OutputPaths {
    fn default() -> Self {
        OutputPaths {
            archive: PathBuf::from("archive.json"),
            progress: PathBuf::from("progress.csv"),
            heatmaps: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub engine: EngineConfig,
    pub output: OutputPaths,
}

fn take<T: DeserializeOwned>(
    map: &mut Map<String, Value>,
    key: &str,
) -> Result<Option<T>, CliError> {
    match map.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v)
            .map(Some)
            .map_err(|e| CliError::Usage(format!("invalid {key}: {e}"))),
    }
}

impl RunConfig {
    pub fn load(path: &Path, seed: Option<u64>) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text, seed)
    }

    /// Parses a config; `seed` overrides the one in the file. A seed must come
    /// from one of the two.
    pub fn from_json(text: &str, seed: Option<u64>) -> Result<Self, CliError> {
        let mut map: Map<String, Value> = serde_json::from_str(text)
            .map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
        let file_seed: Option<u64> = take(&mut map, "seed")?;
        let seed = seed
            .or(file_seed)
            .ok_or_else(|| CliError::Usage("seed required".into()))?;
        let budget: Option<usize> = take(&mut map, "budget")?;
        let output: OutputPaths = take(&mut map, "output")?.unwrap_or_default();
        for key in ["opt1", "opt2"] {
            let spec: OptimizerSpec =
                take(&mut map, key)?.ok_or_else(|| CliError::Usage(format!("{key} required")))?;
            let mut cfg = match spec {
                OptimizerSpec::Preset(name) => preset(&name)?,
                OptimizerSpec::Inline(cfg) => cfg,
            };
            if let Some(b) = budget {
                cfg = cfg.with_budget(b);
            }
            let value = serde_json::to_value(checked(cfg)?).expect("optimizer config serialises");
            map.insert(key.into(), value);
        }
        map.insert("seed".into(), seed.into());
        let engine: EngineConfig = serde_json::from_value(Value::Object(map))
            .map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
        engine
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(RunConfig { engine, output })
    }
}
