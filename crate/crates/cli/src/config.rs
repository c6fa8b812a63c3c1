use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use xqnnue::datagen::{BalanceQuotas, FilterMargins};
use xqnnue::nnue::TrainConfig;
use xqnnue::search::SearchLimits;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub games: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

/// Everything a pipeline run depends on. Loaded from TOML, then overridden by flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub threads: usize,
    pub paths: Paths,
    pub filter: FilterMargins,
    pub quotas: BalanceQuotas,
    pub train: TrainConfig,
    pub search: SearchLimits,
}

impl Default for PipelineConfig {
    fn default() -> PipelineConfig {
        PipelineConfig {
            seed: 1,
            threads: 1,
            paths: Paths::default(),
            filter: FilterMargins::default(),
            quotas: BalanceQuotas::default(),
            train: TrainConfig::default(),
            search: SearchLimits::depth(4),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> Result<PipelineConfig> {
        let Some(path) = path else {
            return Ok(PipelineConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        self.filter.validate().map_err(anyhow::Error::msg)?;
        self.quotas.validate().map_err(anyhow::Error::msg)?;
        self.train.validate()?;
        self.search.validate()?;
        if self.seed > i64::MAX as u64 || self.train.seed > i64::MAX as u64 {
            bail!("seeds must fit in 63 bits");
        }
        let given: Vec<&PathBuf> = [&self.paths.games, &self.paths.dataset, &self.paths.model]
            .into_iter()
            .flatten()
            .collect();
        if given.iter().collect::<BTreeSet<_>>().len() != given.len() {
            bail!("games, dataset and model paths must be distinct");
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Parses `sign,band,imbalanced[,tolerance]`.
pub fn parse_quotas(text: &str, base: BalanceQuotas) -> Result<BalanceQuotas> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad --quotas `{text}`"))?;
    if !(3..=4).contains(&parts.len()) {
        bail!("--quotas takes sign,band,imbalanced[,tolerance]");
    }
    Ok(BalanceQuotas {
        sign_split: parts[0],
        quiet_band_min: parts[1],
        imbalanced_min: parts[2],
        tolerance: parts.get(3).copied().unwrap_or(base.tolerance),
        ..base
    })
}
