use serde::{Deserialize, Serialize};

use crate::code::{CachingSystem, SystemConfig};
use crate::error::{Error, Result};
use crate::secrecy::{Scope, SecretPartition, SecurityMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    /// Uniform random coding vectors, redrawn until MDS.
    #[default]
    Random,
    /// Systematic Vandermonde-based code.
    Systematic,
}

fn default_schema() -> u32 {
    crate::SCHEMA_VERSION
}

fn default_mode() -> String {
    "strong".into()
}

fn default_scope() -> String {
    "fixed".into()
}

/// Parameters of a run, as read from `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub q: u64,
    #[serde(default)]
    pub construction: Construction,
    /// Per-packet erasure probability used by random patterns.
    #[serde(default)]
    pub erase_prob: f64,
    /// Number of trailing source coordinates that hold keys.
    #[serde(default)]
    pub keys: usize,
    /// Search a precoder in every simulated episode.
    #[serde(default)]
    pub search_precoder: bool,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_scope")]
    pub scope: String,
}

impl RunConfig {
    pub fn new(n: usize, k: usize, t: usize, q: u64) -> Self {
        Self {
            schema_version: crate::SCHEMA_VERSION,
            n,
            k,
            t,
            q,
            construction: Construction::Random,
            erase_prob: 0.0,
            keys: 0,
            search_precoder: false,
            mode: default_mode(),
            scope: default_scope(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        crate::check_schema_version(self.schema_version)?;
        self.system_config()?;
        self.partition()?;
        self.security_mode()?;
        self.security_scope()?;
        if !(0.0..=1.0).contains(&self.erase_prob) {
            return Err(Error::InvalidConfig(format!(
                "erase_prob {} outside [0, 1]",
                self.erase_prob
            )));
        }
        Ok(())
    }

    pub fn system_config(&self) -> Result<SystemConfig> {
        SystemConfig::new(self.n, self.k, self.t, self.q)
    }

    pub fn partition(&self) -> Result<SecretPartition> {
        SecretPartition::trailing_keys(self.k * self.t, self.keys)
    }

    pub fn security_mode(&self) -> Result<SecurityMode> {
        self.mode.parse()
    }

    pub fn security_scope(&self) -> Result<Scope> {
        self.scope.parse()
    }

    /// Builds the coding matrix only.
    pub fn build_system(&self, seed: u64) -> Result<CachingSystem> {
        let cfg = self.system_config()?;
        match self.construction {
            Construction::Random => CachingSystem::build(cfg, seed),
            Construction::Systematic => CachingSystem::systematic(cfg),
        }
    }
}
