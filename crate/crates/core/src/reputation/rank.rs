//! Popularity rank providers.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankRecord {
    pub domain: String,
    /// 1-based; `None` means unranked.
    pub rank: Option<u32>,
}

#[derive(Debug, Error)]
pub enum RankError {
    #[error("rank snapshot {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("rank snapshot line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub trait RankProvider: Send + Sync {
    fn lookup(&self, domain: &str) -> RankRecord;
}

/// Every domain is unranked.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoRank;

impl RankProvider for NoRank {
    fn lookup(&self, domain: &str) -> RankRecord {
        RankRecord {
            domain: domain.to_string(),
            rank: None,
        }
    }
}

/// A domain→rank table loaded from a CSV snapshot.
#[derive(Debug, Clone, Default)]
pub struct RankSnapshot {
    ranks: HashMap<String, u32>,
}

fn normalize(domain: &str) -> String {
    domain.trim().trim_end_matches('.').to_ascii_lowercase()
}

impl RankSnapshot {
    pub fn load(path: &Path) -> Result<Self, RankError> {
        let file = std::fs::File::open(path).map_err(|source| RankError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_reader(file)
    }

    /// Header line, then `rank,domain` or `domain,rank` rows. Column roles come
    /// from the header names when recognizable (including the Majestic Million
    /// `GlobalRank,...,Domain,...` layout), otherwise from the first data row.
    pub fn from_reader(r: impl Read) -> Result<Self, RankError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(r);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(|e| RankError::Parse {
                line: 1,
                reason: e.to_string(),
            })?
            .iter()
            .map(|h| h.to_ascii_lowercase())
            .collect();
        let find = |names: &[&str]| headers.iter().position(|h| names.contains(&h.as_str()));
        let mut cols = find(&["globalrank", "rank", "#"]).zip(find(&["domain", "site", "host"]));

        let mut ranks = HashMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| RankError::Parse {
                line,
                reason: e.to_string(),
            })?;
            if rec.iter().all(str::is_empty) {
                continue;
            }
            let (rc, dc) = match cols {
                Some(c) => c,
                None => {
                    let c = if rec.get(0).is_some_and(|f| f.parse::<u32>().is_ok()) {
                        (0, 1)
                    } else {
                        (1, 0)
                    };
                    cols = Some(c);
                    c
                }
            };
            let bad = |reason: &str| RankError::Parse {
                line,
                reason: reason.to_string(),
            };
            let rank: u32 = rec
                .get(rc)
                .and_then(|f| f.parse().ok())
                .filter(|&r| r >= 1)
                .ok_or_else(|| bad("rank must be a positive integer"))?;
            let domain = rec
                .get(dc)
                .map(normalize)
                .filter(|d| !d.is_empty())
                .ok_or_else(|| bad("missing domain"))?;
            ranks
                .entry(domain)
                .and_modify(|r: &mut u32| *r = (*r).min(rank))
                .or_insert(rank);
        }
        Ok(Self { ranks })
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

impl RankProvider for RankSnapshot {
    fn lookup(&self, domain: &str) -> RankRecord {
        let key = normalize(domain);
        RankRecord {
            rank: self.ranks.get(&key).copied(),
            domain: key,
        }
    }
}
