//! Full 23-feature extraction over live or recorded evidence.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, Utc};
use rayon::prelude::*;
use serde::Deserialize;
use tracing::warn;

use super::ingest::LabeledUrl;
use super::matrix::FeatureRow;
use super::DatasetError;
use crate::content::{content_features, fetch_page, FetchConfig, FetchError, PageSnapshot};
use crate::lexical::{lexical_features, LexicalConfig};
use crate::reputation::{
    reputation_features, CachedWhois, DiskCache, FixtureWhois, NoRank, RankProvider, RankRecord,
    RankSnapshot, ReputationConfig, TcpWhois, WhoisRecord, DEFAULT_TTL_DAYS,
};
use crate::schema::{Feature, FeatureVector, FEATURE_COUNT};
use crate::url::{parse_url, ParsedUrl, UrlError};

/// Where page, WHOIS and rank evidence comes from.
pub trait EvidenceSource: Send + Sync {
    fn snapshot(&self, url: &str, parsed: &ParsedUrl) -> PageSnapshot;
    fn whois(&self, domain: &str) -> WhoisRecord;
    fn rank(&self, domain: &str) -> RankRecord;
    /// The "now" that domain age and remaining registration are measured from.
    fn reference_date(&self) -> NaiveDate;
}

#[derive(Debug, Deserialize)]
struct Manifest {
    reference_date: NaiveDate,
}

/// Recorded evidence directory:
///
/// ```text
/// manifest.toml      reference_date = "2026-01-15"
/// snapshots/*.snap   page snapshots, matched on their requested_url
/// whois/<domain>.txt raw WHOIS responses
/// rank.csv           rank snapshot (optional)
/// ```
pub struct EvidenceDir {
    root: PathBuf,
    snapshots: HashMap<String, PageSnapshot>,
    whois: FixtureWhois,
    rank: Box<dyn RankProvider>,
    reference_date: NaiveDate,
}

impl EvidenceDir {
    pub fn open(root: &Path) -> Result<Self, DatasetError> {
        let bad = |reason: String| DatasetError::Evidence {
            path: root.display().to_string(),
            reason,
        };
        if !root.is_dir() {
            return Err(bad("not a directory".into()));
        }
        let manifest_text = std::fs::read_to_string(root.join("manifest.toml"))
            .map_err(|e| bad(format!("manifest.toml: {e}")))?;
        let manifest: Manifest =
            toml::from_str(&manifest_text).map_err(|e| bad(format!("manifest.toml: {e}")))?;

        let mut snapshots = HashMap::new();
        let snap_dir = root.join("snapshots");
        if snap_dir.is_dir() {
            let mut paths: Vec<PathBuf> = std::fs::read_dir(&snap_dir)
                .map_err(|e| bad(e.to_string()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "snap"))
                .collect();
            paths.sort();
            for p in paths {
                let s = PageSnapshot::load(&p).map_err(|e| bad(format!("{}: {e}", p.display())))?;
                if let Ok(parsed) = parse_url(&s.requested_url) {
                    snapshots
                        .entry(parsed.dedupe_key())
                        .or_insert_with(|| s.clone());
                }
                snapshots.insert(s.requested_url.clone(), s);
            }
        }

        let rank_path = root.join("rank.csv");
        let rank: Box<dyn RankProvider> = if rank_path.exists() {
            Box::new(RankSnapshot::load(&rank_path).map_err(|e| bad(e.to_string()))?)
        } else {
            Box::new(NoRank)
        };

        Ok(Self {
            root: root.to_path_buf(),
            snapshots,
            whois: FixtureWhois::new(root.join("whois")),
            rank,
            reference_date: manifest.reference_date,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn snapshot_count(&self) -> usize {
        self.snapshots
            .values()
            .map(|s| &s.requested_url)
            .collect::<std::collections::HashSet<_>>()
            .len()
    }
}

impl EvidenceSource for EvidenceDir {
    fn snapshot(&self, url: &str, parsed: &ParsedUrl) -> PageSnapshot {
        let at = self
            .reference_date
            .and_hms_opt(0, 0, 0)
            .expect("midnight exists")
            .and_utc();
        self.snapshots
            .get(url.trim())
            .or_else(|| self.snapshots.get(&parsed.dedupe_key()))
            .cloned()
            .unwrap_or_else(|| PageSnapshot::failed(url, FetchError::MissingEvidence, at))
    }

    fn whois(&self, domain: &str) -> WhoisRecord {
        crate::reputation::lookup_whois(domain, &self.whois)
    }

    fn rank(&self, domain: &str) -> RankRecord {
        self.rank.lookup(domain)
    }

    fn reference_date(&self) -> NaiveDate {
        self.reference_date
    }
}

/// Network evidence: live fetch, WHOIS over TCP/43 behind a disk cache, and a
/// rank provider.
pub struct LiveEvidence {
    pub fetch: FetchConfig,
    pub whois: CachedWhois<TcpWhois>,
    pub rank: Box<dyn RankProvider>,
}

impl LiveEvidence {
    pub fn new(
        fetch: FetchConfig,
        cache_dir: &Path,
        rank: Box<dyn RankProvider>,
    ) -> std::io::Result<Self> {
        let ttl = chrono::Duration::days(DEFAULT_TTL_DAYS);
        let whois = CachedWhois::new(
            TcpWhois::new(fetch.timeout, std::time::Duration::from_millis(500)),
            DiskCache::open(cache_dir.join("whois"), ttl)?,
        );
        Ok(Self { fetch, whois, rank })
    }
}

impl EvidenceSource for LiveEvidence {
    fn snapshot(&self, url: &str, _parsed: &ParsedUrl) -> PageSnapshot {
        fetch_page(url, &self.fetch)
    }

    fn whois(&self, domain: &str) -> WhoisRecord {
        self.whois.lookup(domain)
    }

    fn rank(&self, domain: &str) -> RankRecord {
        self.rank.lookup(domain)
    }

    fn reference_date(&self) -> NaiveDate {
        Utc::now().date_naive()
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExtractConfig {
    /// Worker threads; 0 means one per core.
    pub parallelism: usize,
    pub lexical: LexicalConfig,
    pub reputation: ReputationConfig,
}

/// One URL's features plus what had to be folded for lack of evidence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub features: FeatureVector,
    pub fetch_error: Option<FetchError>,
    pub folded: Vec<Feature>,
}

pub fn extract_url(
    url: &str,
    evidence: &dyn EvidenceSource,
    cfg: &ExtractConfig,
) -> Result<Extraction, UrlError> {
    let parsed = parse_url(url)?;
    let snap = evidence.snapshot(url, &parsed);
    let (whois, rank) = if parsed.is_ip_host {
        (
            WhoisRecord::not_found(&parsed.host),
            RankRecord {
                domain: parsed.host.clone(),
                rank: None,
            },
        )
    } else {
        (
            evidence.whois(&parsed.registrable_domain),
            evidence.rank(&parsed.registrable_domain),
        )
    };

    let mut features = FeatureVector::default();
    let lex = lexical_features(&parsed, &cfg.lexical);
    let con = content_features(&parsed, &snap);
    let rep = reputation_features(&whois, &rank, evidence.reference_date(), cfg.reputation);
    for (f, v) in lex.into_iter().chain(con).chain(rep) {
        features[f] = v;
    }

    let mut folded = Vec::new();
    if snap.no_response() {
        folded.extend([
            Feature::IFrame,
            Feature::MouseOver,
            Feature::RightClick,
            Feature::WebForwards,
            Feature::Email,
        ]);
    }
    if parsed.is_https() && snap.tls.is_none() {
        folded.push(Feature::Ssl);
    }
    if !whois.found {
        folded.push(Feature::DnsRecord);
    }
    if whois.creation_date.is_none() {
        folded.push(Feature::DomainAge);
    }
    if whois.expiration_date.is_none() {
        folded.push(Feature::DomainEnd);
    }
    if rank.rank.is_none() {
        folded.push(Feature::WebTraffic);
    }
    folded.sort_by_key(|f| f.index());

    Ok(Extraction {
        features,
        fetch_error: snap.fetch_error,
        folded,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExtractReport {
    pub total: usize,
    pub extracted: usize,
    /// Inputs that could not be parsed as URLs, with the reason.
    pub skipped: Vec<(String, String)>,
    pub fetch_errors: BTreeMap<FetchError, usize>,
    /// Per feature, how many rows took a missing-evidence fold.
    pub folded: [usize; FEATURE_COUNT],
}

impl fmt::Display for ExtractReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "extracted {}/{} urls, skipped {}",
            self.extracted,
            self.total,
            self.skipped.len()
        )?;
        if !self.fetch_errors.is_empty() {
            let errs: Vec<String> = self
                .fetch_errors
                .iter()
                .map(|(e, n)| format!("{e}={n}"))
                .collect();
            write!(f, "; fetch errors: {}", errs.join(" "))?;
        }
        let folds: Vec<String> = Feature::ALL
            .iter()
            .filter(|ft| self.folded[ft.index()] > 0)
            .map(|ft| format!("{}={}", ft.name(), self.folded[ft.index()]))
            .collect();
        if !folds.is_empty() {
            write!(f, "; folded: {}", folds.join(" "))?;
        }
        Ok(())
    }
}

/// Extract every item, in input order. Per-URL problems fold into feature
/// values or, for unparseable URLs, into the report; only a batch where
/// nothing could be extracted is an error.
pub fn extract_all(
    items: &[LabeledUrl],
    evidence: &dyn EvidenceSource,
    cfg: &ExtractConfig,
) -> Result<(Vec<FeatureRow>, ExtractReport), DatasetError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| DatasetError::Internal(e.to_string()))?;
    let results: Vec<Result<Extraction, UrlError>> = pool.install(|| {
        items
            .par_iter()
            .map(|it| extract_url(&it.url, evidence, cfg))
            .collect()
    });

    let mut report = ExtractReport {
        total: items.len(),
        ..Default::default()
    };
    let mut rows = Vec::with_capacity(items.len());
    for (item, res) in items.iter().zip(results) {
        match res {
            Ok(x) => {
                if let Some(e) = x.fetch_error {
                    *report.fetch_errors.entry(e).or_default() += 1;
                }
                for f in &x.folded {
                    report.folded[f.index()] += 1;
                }
                rows.push(FeatureRow {
                    url: item.url.clone(),
                    features: x.features,
                    label: Some(item.label),
                });
            }
            Err(e) => {
                warn!(url = item.url, error = %e, "skipping url");
                report.skipped.push((item.url.clone(), e.to_string()));
            }
        }
    }
    report.extracted = rows.len();
    if !items.is_empty() && rows.is_empty() {
        return Err(DatasetError::TotalFailure(report.skipped.len()));
    }
    Ok((rows, report))
}
