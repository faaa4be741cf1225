//! Flat process discovery: a log goes in, a Petri net comes out.
//!
//! Two miners are bundled. External miners can be wired in by
//! implementing [`Discover`] or by passing a closure.

mod dfg;
mod inductive;
mod process_tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dfg::{discover_dfg, DirectlyFollowsGraph};
pub use inductive::discover_inductive;
pub use process_tree::ProcessTree;

use crate::event_log::EventLog;
use crate::petri::PetriNet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscoveryError {
    #[error("cannot discover a model from an empty log")]
    EmptyLog,
    #[error("unknown miner `{0}` (expected `inductive` or `dfg`)")]
    UnknownMiner(String),
    #[error("parameter {name} = {value} is outside [0, 1]")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("miner failed: {0}")]
    Failed(String),
}

pub type Result<T, E = DiscoveryError> = std::result::Result<T, E>;

/// Translates a process tree into a workflow net with the same language.
pub fn tree_to_petri(tree: &ProcessTree) -> PetriNet {
    tree.to_petri_net()
}

/// Miner selection plus its single parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "miner", rename_all = "lowercase")]
pub enum MinerConfig {
    Inductive { noise: f64 },
    Dfg { edge_filter: f64 },
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig::Inductive { noise: 0.2 }
    }
}

impl MinerConfig {
    /// Builds a configuration from a miner name and its threshold.
    pub fn from_name(name: &str, threshold: f64) -> Result<Self> {
        let config = match name.to_ascii_lowercase().as_str() {
            "inductive" | "im" | "imf" => MinerConfig::Inductive { noise: threshold },
            "dfg" => MinerConfig::Dfg { edge_filter: threshold },
            _ => return Err(DiscoveryError::UnknownMiner(name.to_string())),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn name(&self) -> &'static str {
        match self {
            MinerConfig::Inductive { .. } => "inductive",
            MinerConfig::Dfg { .. } => "dfg",
        }
    }

    pub fn threshold(&self) -> f64 {
        match *self {
            MinerConfig::Inductive { noise } => noise,
            MinerConfig::Dfg { edge_filter } => edge_filter,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (name, value) = match *self {
            MinerConfig::Inductive { noise } => ("noise", noise),
            MinerConfig::Dfg { edge_filter } => ("edge_filter", edge_filter),
        };
        if (0.0..=1.0).contains(&value) {
            Ok(())
        } else {
            Err(DiscoveryError::InvalidParameter { name, value })
        }
    }
}

impl fmt::Display for MinerConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name(), self.threshold())
    }
}

impl FromStr for MinerConfig {
    type Err = DiscoveryError;

    /// Accepts `name` (default threshold) or `name/threshold`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, threshold) = match s.split_once('/') {
            Some((n, t)) => {
                let value = t.trim().parse().map_err(|_| DiscoveryError::UnknownMiner(s.to_string()))?;
                (n, value)
            }
            None if s.eq_ignore_ascii_case("dfg") => (s, 0.0),
            None => (s, MinerConfig::default().threshold()),
        };
        Self::from_name(name.trim(), threshold)
    }
}

/// Runs the configured miner.
pub fn mine(log: &EventLog, config: &MinerConfig) -> Result<PetriNet> {
    config.validate()?;
    if log.is_empty() {
        return Err(DiscoveryError::EmptyLog);
    }
    Ok(match *config {
        MinerConfig::Inductive { noise } => discover_inductive(log, noise).to_petri_net(),
        MinerConfig::Dfg { edge_filter } => discover_dfg(log, edge_filter),
    })
}

/// A discovery algorithm usable by the hierarchy builder.
pub trait Discover: Sync {
    fn discover(&self, log: &EventLog) -> Result<PetriNet>;
}

impl Discover for MinerConfig {
    fn discover(&self, log: &EventLog) -> Result<PetriNet> {
        mine(log, self)
    }
}

impl<F> Discover for F
where
    F: Fn(&EventLog) -> Result<PetriNet> + Sync,
{
    fn discover(&self, log: &EventLog) -> Result<PetriNet> {
        self(log)
    }
}
