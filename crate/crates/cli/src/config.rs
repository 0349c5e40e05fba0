//! Training configuration from plain `key=value` files.

use std::path::Path;

use moat_core::training::{Optimizer, TrainConfig};

use crate::error::CliError;

/// Parses a config file of `key=value` lines (`#` comments allowed).
/// Recognized keys: `batch_size`, `learning_rate` (or `lr`), `epochs`,
/// `seed`, `smoothing`, `optimizer` (sgd | adam).
pub fn load_config(path: &Path) -> Result<TrainConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut config = TrainConfig::default();
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "{}: line {}: expected key=value, got {raw:?}",
                path.display(),
                line_no + 1
            ))
        })?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |what: &str| {
            CliError::Usage(format!(
                "{}: line {}: invalid {what} {value:?}",
                path.display(),
                line_no + 1
            ))
        };
        match key {
            "batch_size" => config.batch_size = value.parse().map_err(|_| bad("batch_size"))?,
            "learning_rate" | "lr" => {
                config.learning_rate = value.parse().map_err(|_| bad("learning_rate"))?
            }
            "epochs" => config.epochs = value.parse().map_err(|_| bad("epochs"))?,
            "seed" => config.seed = value.parse().map_err(|_| bad("seed"))?,
            "smoothing" => config.smoothing = value.parse().map_err(|_| bad("smoothing"))?,
            "optimizer" => {
                config.optimizer = match value {
                    "sgd" => Optimizer::Sgd,
                    "adam" => Optimizer::Adam,
                    _ => return Err(bad("optimizer")),
                }
            }
            _ => {
                return Err(CliError::Usage(format!(
                    "{}: line {}: unknown key {key:?}",
                    path.display(),
                    line_no + 1
                )))
            }
        }
    }
    Ok(config)
}
