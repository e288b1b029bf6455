//! Config file named by `PHISHLENS_CONFIG` (or `--config`). TOML, flat, keys
//! spelled like the long flags:
//!
//! ```toml
//! model = "models/rf.model"
//! port = 8970
//! offline = true
//! evidence-dir = "fixtures/corpus"
//! history-dir = "/var/lib/phishlens/history"
//! allow-origin = ["chrome-extension://abcdef"]
//! ```
//!
//! A flag given on the command line wins over the file.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::Deserialize;

use phishlens::content::FetchConfig;
use phishlens::dataset::{EvidenceDir, EvidenceSource, LiveEvidence};
use phishlens::reputation::{NoRank, RankProvider, RankSnapshot};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    pub fn into_vec(self) -> Vec<String> {
        match self {
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<PathBuf>,
    pub host: Option<String>,
    pub port: Option<u16>,
    pub offline: Option<bool>,
    pub evidence_dir: Option<PathBuf>,
    pub history_dir: Option<PathBuf>,
    pub history_max_bytes: Option<u64>,
    pub allow_origin: Option<OneOrMany>,
    pub deadline_ms: Option<u64>,
    pub timeout_ms: Option<u64>,
    pub cache_dir: Option<PathBuf>,
    pub rank_snapshot: Option<PathBuf>,
    pub web_traffic_literal: Option<bool>,
    pub parallel: Option<usize>,
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub grid: Option<String>,
    pub limit: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
    }
}

fn home_dir() -> Option<PathBuf> {
    std::env::var_os("HOME")
        .filter(|h| !h.is_empty())
        .map(PathBuf::from)
}

/// `$XDG_DATA_HOME/phishlens/history`, else under `~/.local/share`.
pub fn default_history_dir() -> PathBuf {
    std::env::var_os("XDG_DATA_HOME")
        .filter(|h| !h.is_empty())
        .map(PathBuf::from)
        .or_else(|| home_dir().map(|h| h.join(".local/share")))
        .unwrap_or_else(|| PathBuf::from("."))
        .join("phishlens/history")
}

/// `$XDG_CACHE_HOME/phishlens`, else `~/.cache/phishlens`.
pub fn default_cache_dir() -> PathBuf {
    std::env::var_os("XDG_CACHE_HOME")
        .filter(|h| !h.is_empty())
        .map(PathBuf::from)
        .or_else(|| home_dir().map(|h| h.join(".cache")))
        .unwrap_or_else(|| PathBuf::from("."))
        .join("phishlens")
}

/// Everything needed to decide where evidence comes from.
#[derive(Debug, Clone, Default)]
pub struct EvidenceOptions {
    pub offline: bool,
    pub evidence_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub rank_snapshot: Option<PathBuf>,
    pub timeout: Option<Duration>,
}

impl EvidenceOptions {
    pub fn build(&self) -> Result<Arc<dyn EvidenceSource>, CliError> {
        if self.offline {
            let dir = self
                .evidence_dir
                .as_ref()
                .ok_or_else(|| CliError::usage("--offline needs --evidence-dir"))?;
            return Ok(Arc::new(EvidenceDir::open(dir)?));
        }
        if self.evidence_dir.is_some() {
            return Err(CliError::usage(
                "--evidence-dir is only read with --offline",
            ));
        }
        let rank: Box<dyn RankProvider> = match &self.rank_snapshot {
            Some(p) => Box::new(
                RankSnapshot::load(p)
                    .map_err(|e| CliError::data(format!("rank snapshot {}: {e}", p.display())))?,
            ),
            None => Box::new(NoRank),
        };
        let mut fetch = FetchConfig::default();
        if let Some(t) = self.timeout {
            fetch.timeout = t;
        }
        let cache = self.cache_dir.clone().unwrap_or_else(default_cache_dir);
        let live = LiveEvidence::new(fetch, &cache, rank)
            .map_err(|e| CliError::data(format!("cache dir {}: {e}", cache.display())))?;
        Ok(Arc::new(live))
    }
}
