use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use rlpe::search::DEFAULT_DEPTH;
use rlpe::{SolverConfig, Strategy};

/// A saved `explain` invocation. Relative paths resolve against the file's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub catalog: Option<PathBuf>,
    pub strategy: Strategy,
    pub depth: usize,
    pub solver: SolverConfig,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timeout: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            builtin: None,
            domain: None,
            policy: None,
            catalog: None,
            strategy: Strategy::Base,
            depth: DEFAULT_DEPTH,
            solver: SolverConfig::default(),
            seed: 0,
            timeout: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("config file {}", path.display()))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(rlpe::Error::from)
            .with_context(|| format!("config file {}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.domain, &mut cfg.policy, &mut cfg.catalog].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}
