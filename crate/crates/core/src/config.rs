//! Experiment configuration files.
//!
//! A config is TOML. Grids may be written either as an explicit list or as an
//! inclusive range string `"start:stop:step"`. The normalised form (grid
//! expanded, every default filled in) is what gets hashed into the manifest,
//! so two files that describe the same experiment share a hash.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::decoder::DecoderConfig;
use crate::error::{Error, Result};
use crate::fusion::RusPolicy;
use crate::montecarlo::ExperimentPlan;
use crate::noise::{Channel, NoiseParams};

/// Decimal places kept when expanding a range grid; removes the float drift
/// of repeated addition so CSV values print as written.
const GRID_DIGITS: i32 = 12;

/// Parses `"start:stop:step"` into an inclusive, strictly increasing grid.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let num = |t: &str| {
        t.parse::<f64>().map_err(|_| Error::Config(format!("bad number '{t}' in grid '{s}'")))
    };
    match parts.as_slice() {
        [one] => Ok(vec![num(one)?]),
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
                return Err(Error::Config(format!("grid '{s}' needs start <= stop and step > 0")));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            let scale = 10f64.powi(GRID_DIGITS);
            Ok((0..count).map(|i| ((a + i as f64 * step) * scale).round() / scale).collect())
        }
        _ => Err(Error::Config(format!("grid '{s}' is not of the form start:stop:step"))),
    }
}

/// Parses a comma-separated list of values or a single range.
pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    if s.contains(':') {
        return parse_grid(s);
    }
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>().map_err(|_| Error::Config(format!("bad number '{t}' in '{s}'")))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range(String),
}

impl Grid {
    pub fn expand(&self) -> Result<Vec<f64>> {
        match self {
            Grid::List(v) => Ok(v.clone()),
            Grid::Range(s) => parse_grid(s),
        }
    }
}

fn default_trials() -> u64 {
    1000
}

fn default_bootstrap() -> usize {
    200
}

fn default_blink_sum() -> f64 {
    1.0
}

/// A threshold experiment as written in a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub channel: Channel,
    pub distances: Vec<usize>,
    pub attempts: Vec<u32>,
    pub grid: Grid,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    #[serde(default = "default_blink_sum")]
    pub blink_sum: f64,
    #[serde(default)]
    pub policy: RusPolicy,
    #[serde(default)]
    pub noise: NoiseParams,
    #[serde(default)]
    pub decoder: DecoderConfig,
}

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Same experiment with the grid expanded to an explicit list.
    pub fn normalised(&self) -> Result<Self> {
        Ok(ExperimentConfig { grid: Grid::List(self.grid.expand()?), ..self.clone() })
    }

    /// SHA-256 of the normalised TOML, hex encoded.
    pub fn hash(&self) -> Result<String> {
        let text = self.normalised()?.to_toml()?;
        Ok(hex::encode(Sha256::digest(text.as_bytes())))
    }

    pub fn plan(&self) -> Result<ExperimentPlan> {
        let plan = ExperimentPlan {
            distances: self.distances.clone(),
            attempts: self.attempts.clone(),
            channel: self.channel,
            grid: self.grid.expand()?,
            trials: self.trials,
            seed: self.seed,
            noise: self.noise,
            policy: self.policy,
            decoder: self.decoder,
            blink_sum: self.blink_sum,
            bootstrap: self.bootstrap,
        };
        plan.validate()?;
        Ok(plan)
    }
}

impl From<&ExperimentPlan> for ExperimentConfig {
    fn from(p: &ExperimentPlan) -> Self {
        ExperimentConfig {
            channel: p.channel,
            distances: p.distances.clone(),
            attempts: p.attempts.clone(),
            grid: Grid::List(p.grid.clone()),
            trials: p.trials,
            seed: p.seed,
            bootstrap: p.bootstrap,
            blink_sum: p.blink_sum,
            policy: p.policy,
            noise: p.noise,
            decoder: p.decoder,
        }
    }
}
