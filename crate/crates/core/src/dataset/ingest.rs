//! Labeled URL feeds: Majestic-style and PhishTank-style CSVs or plain lists.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tracing::warn;

use super::DatasetError;
use crate::schema::Label;
use crate::url::parse_url;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledUrl {
    pub url: String,
    pub label: Label,
    pub source: String,
}

const URL_HEADERS: &[&str] = &["url", "domain", "link", "site", "host", "hostname"];

fn url_shaped(s: &str) -> bool {
    let s = s.trim();
    if s.is_empty() || s.contains(char::is_whitespace) || s.parse::<f64>().is_ok() {
        return false;
    }
    s.contains("://") || (s.contains('.') && parse_url(s).is_ok())
}

/// Pull the URL column out of a CSV: a recognised header name, else the first
/// URL-shaped column of the first row (which then counts as data).
fn csv_urls(text: &str) -> Result<Vec<String>, csv::Error> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = rdr.records();
    let Some(first) = records.next().transpose()? else {
        return Ok(Vec::new());
    };
    let by_name = first
        .iter()
        .position(|h| URL_HEADERS.contains(&h.to_ascii_lowercase().as_str()));
    let mut out = Vec::new();
    let col = match by_name {
        Some(c) => c,
        None => match first.iter().position(url_shaped) {
            Some(c) => {
                out.push(first[c].to_string());
                c
            }
            None => {
                // Header without a known name: look at the first data row.
                let Some(second) = records.next().transpose()? else {
                    return Ok(out);
                };
                let Some(c) = second.iter().position(url_shaped) else {
                    return Ok(out);
                };
                out.push(second[c].to_string());
                c
            }
        },
    };
    for rec in records {
        if let Some(v) = rec?.get(col) {
            out.push(v.to_string());
        }
    }
    Ok(out)
}

fn looks_like_csv(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.contains(','))
}

/// Read a feed, dropping blanks, comments and unparseable entries, then
/// deduplicating on the normalized URL (host case-insensitive) in file order.
pub fn ingest_feed(
    path: &Path,
    label: Label,
    limit: Option<usize>,
) -> Result<Vec<LabeledUrl>, DatasetError> {
    let unreadable = |source| DatasetError::FileUnreadable {
        path: path.display().to_string(),
        source,
    };
    let bytes = std::fs::read(path).map_err(unreadable)?;
    let text = String::from_utf8_lossy(&bytes);
    let raw: Vec<String> = if looks_like_csv(&text) {
        csv_urls(&text).map_err(|e| DatasetError::Malformed {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?
    } else {
        text.lines()
            .map(str::trim)
            .filter(|l| !l.starts_with('#'))
            .map(str::to_string)
            .collect()
    };

    let source = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for url in raw {
        let url = url.trim();
        if url.is_empty() {
            continue;
        }
        let Ok(parsed) = parse_url(url) else {
            warn!(url, "skipping unparseable feed entry");
            continue;
        };
        if !seen.insert(parsed.dedupe_key()) {
            continue;
        }
        out.push(LabeledUrl {
            url: url.to_string(),
            label,
            source: source.clone(),
        });
        if limit.is_some_and(|n| out.len() >= n) {
            break;
        }
    }
    if out.is_empty() {
        return Err(DatasetError::NoUrlsFound(path.display().to_string()));
    }
    Ok(out)
}

/// `url,label,source` CSV.
pub fn save_labeled(items: &[LabeledUrl], path: &Path) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| DatasetError::csv(path, e))?;
    w.write_record(["url", "label", "source"])
        .map_err(|e| DatasetError::csv(path, e))?;
    for it in items {
        let label = it.label.as_u8().to_string();
        w.write_record([it.url.as_str(), label.as_str(), it.source.as_str()])
            .map_err(|e| DatasetError::csv(path, e))?;
    }
    w.flush().map_err(|source| DatasetError::FileUnreadable {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_labeled(path: &Path) -> Result<Vec<LabeledUrl>, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| DatasetError::csv(path, e))?;
    let headers = rdr
        .headers()
        .map_err(|e| DatasetError::csv(path, e))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(uc), Some(lc)) = (col("url"), col("label")) else {
        return Err(DatasetError::SchemaMismatch {
            expected: "url,label[,source]".into(),
            found: headers.iter().collect::<Vec<_>>().join(","),
        });
    };
    let sc = col("source");
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| DatasetError::csv(path, e))?;
        let bad = |reason: String| DatasetError::Malformed {
            line: i + 2,
            reason,
        };
        let url = rec.get(uc).unwrap_or("").to_string();
        if url.is_empty() {
            return Err(bad("empty url".into()));
        }
        let label = rec.get(lc).unwrap_or("").parse::<Label>().map_err(bad)?;
        let source = sc.and_then(|c| rec.get(c)).unwrap_or("").to_string();
        out.push(LabeledUrl { url, label, source });
    }
    Ok(out)
}
