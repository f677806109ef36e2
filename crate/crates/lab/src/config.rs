//! JSON run configuration.

use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use schottky_core::schottky::{Disk, SchottkyGroup, DEFAULT_WORD_BUDGET};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub c_src: f64,
    pub r_src: f64,
    pub c_dst: f64,
    pub r_dst: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budgets {
    /// Largest number of words any enumeration may visit.
    pub words: usize,
    /// Word length of the cycle expansion.
    pub n_max: usize,
    /// Spectral cutoff |z| ≤ r_cut of the trace formula.
    pub r_cut: f64,
    /// Chebyshev nodes per interval of the transfer operator.
    pub transfer_nodes: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Self { words: DEFAULT_WORD_BUDGET, n_max: 14, r_cut: 60.0, transfer_nodes: 24 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: u32,
    pub generators: Vec<GeneratorSpec>,
    /// Defaults to 1 − rank.
    #[serde(default)]
    pub euler_char: Option<i64>,
    #[serde(default)]
    pub dk: Vec<f64>,
    #[serde(default)]
    pub budgets: Budgets,
    /// Recorded in the config hash; contour jitter is deterministic.
    #[serde(default)]
    pub seed: u64,
}

/// A parsed and validated configuration together with its group.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    pub group: SchottkyGroup,
    /// sha256 of the config bytes.
    pub hash: String,
}

impl Loaded {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| LabError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "<root>".to_string() } else { path };
            LabError::config(field, e.into_inner().to_string())
        })?;
        if config.n != 1 {
            return Err(LabError::config("n", "only n = 1 is supported"));
        }
        if config.generators.is_empty() {
            return Err(LabError::config("generators", "at least one generator is required"));
        }
        let b = &config.budgets;
        if b.words == 0 {
            return Err(LabError::config("budgets.words", "must be positive"));
        }
        if b.n_max == 0 {
            return Err(LabError::config("budgets.n_max", "must be positive"));
        }
        if !(b.r_cut > 0.0) {
            return Err(LabError::config("budgets.r_cut", "must be positive"));
        }
        if b.transfer_nodes < 2 {
            return Err(LabError::config("budgets.transfer_nodes", "must be at least 2"));
        }
        let pairs: Vec<(Disk, Disk)> = config
            .generators
            .iter()
            .map(|g| (Disk::new(g.c_src, g.r_src), Disk::new(g.c_dst, g.r_dst)))
            .collect();
        let group = SchottkyGroup::from_disk_pairs(&pairs).map_err(|e| LabError::config("generators", e.to_string()))?;
        let chi = config.euler_char.unwrap_or(1 - config.generators.len() as i64);
        let group = group.with_euler_char(chi).with_dk_values(config.dk.clone());
        let hash = hex::encode(Sha256::digest(text.as_bytes()));
        Ok(Self { config, group, hash })
    }

    /// First line of every artifact.
    pub fn header(&self) -> String {
        format!("config_sha256={} schottky-lab {}", self.hash, env!("CARGO_PKG_VERSION"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{"n":1,"generators":[{"c_src":-2,"r_src":1,"c_dst":2,"r_dst":1},{"c_src":-6,"r_src":1,"c_dst":6,"r_dst":1}]}"#;

    #[test]
    fn parses_defaults() {
        let l = Loaded::parse(GOOD).unwrap();
        assert_eq!(l.group.euler_char(), -1);
        assert_eq!(l.config.budgets, Budgets::default());
        assert_eq!(l.hash.len(), 64);
    }

    #[test]
    fn names_the_bad_field() {
        let bad = GOOD.replace("\"r_src\":1,\"c_dst\":2", "\"r_src\":\"x\",\"c_dst\":2");
        match Loaded::parse(&bad) {
            Err(LabError::Config { field, .. }) => assert_eq!(field, "generators[0].r_src"),
            other => panic!("{other:?}"),
        }
        match Loaded::parse(r#"{"n":2,"generators":[]}"#) {
            Err(LabError::Config { field, .. }) => assert_eq!(field, "n"),
            other => panic!("{other:?}"),
        }
        match Loaded::parse(r#"{"n":1}"#) {
            Err(LabError::Config { message, .. }) => assert!(message.contains("generators")),
            other => panic!("{other:?}"),
        }
        let overlap = GOOD.replace("\"c_src\":-6", "\"c_src\":-2.5");
        assert!(matches!(Loaded::parse(&overlap), Err(LabError::Config { .. })));
    }
}
