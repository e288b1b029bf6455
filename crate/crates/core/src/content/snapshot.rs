//! Recorded page evidence and its on-disk fixture format.
//!
//! A fixture file is a block of `key: value` header lines, a blank line, then
//! the raw body:
//!
//! ```text
//! requested_url: http://a.example/
//! redirect: http://a.example/
//! final_url: https://b.example/
//! status: 200
//! fetched_at: 2026-01-15T00:00:00Z
//! tls_issuer: Example CA
//! tls_trusted: true
//! tls_not_before: 2025-01-01
//! tls_not_after: 2026-04-01
//!
//! <html>...
//! ```
//!
//! `redirect` repeats once per hop. A snapshot with `fetch_error` carries no
//! body.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("snapshot line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("snapshot violates invariant: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FetchError {
    Timeout,
    DnsFailure,
    ConnectionRefused,
    TooManyRedirects,
    NonHtml,
    /// Offline mode had no recorded snapshot for the URL.
    MissingEvidence,
}

impl FetchError {
    pub fn as_str(self) -> &'static str {
        match self {
            FetchError::Timeout => "timeout",
            FetchError::DnsFailure => "dns_failure",
            FetchError::ConnectionRefused => "connection_refused",
            FetchError::TooManyRedirects => "too_many_redirects",
            FetchError::NonHtml => "non_html",
            FetchError::MissingEvidence => "missing_evidence",
        }
    }
}

impl fmt::Display for FetchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FetchError {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "timeout" => FetchError::Timeout,
            "dns_failure" => FetchError::DnsFailure,
            "connection_refused" => FetchError::ConnectionRefused,
            "too_many_redirects" => FetchError::TooManyRedirects,
            "non_html" => FetchError::NonHtml,
            "missing_evidence" => FetchError::MissingEvidence,
            other => return Err(format!("unknown fetch error {other:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TlsFacts {
    pub issuer_organization: String,
    pub issuer_trusted: bool,
    pub not_before: NaiveDate,
    pub not_after: NaiveDate,
    pub certificate_age_days: i64,
}

impl TlsFacts {
    pub fn new(
        issuer_organization: String,
        issuer_trusted: bool,
        not_before: NaiveDate,
        not_after: NaiveDate,
        observed_on: NaiveDate,
    ) -> Self {
        let certificate_age_days = (observed_on - not_before).num_days().max(0);
        Self {
            issuer_organization,
            issuer_trusted,
            not_before,
            not_after,
            certificate_age_days,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageSnapshot {
    pub requested_url: String,
    /// Every URL that answered with a redirect, starting with `requested_url`.
    pub redirect_chain: Vec<String>,
    pub final_url: String,
    pub status: Option<u16>,
    pub body: Option<String>,
    pub fetched_at: DateTime<Utc>,
    pub tls: Option<TlsFacts>,
    pub fetch_error: Option<FetchError>,
}

impl PageSnapshot {
    /// A snapshot for a fetch that produced no usable response.
    pub fn failed(url: &str, error: FetchError, fetched_at: DateTime<Utc>) -> Self {
        Self {
            requested_url: url.to_string(),
            redirect_chain: Vec::new(),
            final_url: url.to_string(),
            status: None,
            body: None,
            fetched_at,
            tls: None,
            fetch_error: Some(error),
        }
    }

    /// True when the "response not found" branches apply.
    pub fn no_response(&self) -> bool {
        self.fetch_error.is_some() || self.body.is_none()
    }

    pub fn validate(&self) -> Result<(), SnapshotError> {
        let broken = self.body.is_none() || self.status.is_none();
        if self.fetch_error.is_some() != broken {
            return Err(SnapshotError::Invariant(
                "fetch_error must be set exactly when body or status is absent".into(),
            ));
        }
        if let Some(first) = self.redirect_chain.first() {
            if *first != self.requested_url {
                return Err(SnapshotError::Invariant(
                    "redirect chain must start at the requested URL".into(),
                ));
            }
        }
        if let Some(tls) = &self.tls {
            if tls.not_before >= tls.not_after {
                return Err(SnapshotError::Invariant(
                    "certificate not_before must precede not_after".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn to_fixture(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: &str| {
            out.push_str(k);
            out.push_str(": ");
            out.push_str(v);
            out.push('\n');
        };
        line("requested_url", &self.requested_url);
        for hop in &self.redirect_chain {
            line("redirect", hop);
        }
        line("final_url", &self.final_url);
        if let Some(s) = self.status {
            line("status", &s.to_string());
        }
        line(
            "fetched_at",
            &self
                .fetched_at
                .to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        );
        if let Some(e) = self.fetch_error {
            line("fetch_error", e.as_str());
        }
        if let Some(t) = &self.tls {
            line("tls_issuer", &t.issuer_organization);
            line(
                "tls_trusted",
                if t.issuer_trusted { "true" } else { "false" },
            );
            line("tls_not_before", &t.not_before.to_string());
            line("tls_not_after", &t.not_after.to_string());
        }
        out.push('\n');
        if let Some(b) = &self.body {
            out.push_str(b);
        }
        out
    }

    pub fn from_fixture(text: &str) -> Result<Self, SnapshotError> {
        let (header, body) = match text.find("\n\n") {
            Some(i) => (&text[..i], &text[i + 2..]),
            None => (text.trim_end_matches('\n'), ""),
        };

        let mut requested_url = None;
        let mut redirect_chain = Vec::new();
        let mut final_url = None;
        let mut status = None;
        let mut fetched_at = None;
        let mut fetch_error = None;
        let mut issuer = None;
        let mut trusted = None;
        let mut not_before = None;
        let mut not_after = None;

        for (i, raw_line) in header.lines().enumerate() {
            let lineno = i + 1;
            let err = |reason: String| SnapshotError::Parse {
                line: lineno,
                reason,
            };
            let (key, value) = raw_line
                .split_once(':')
                .ok_or_else(|| err(format!("expected key: value, got {raw_line:?}")))?;
            let value = value.trim();
            match key.trim() {
                "requested_url" => requested_url = Some(value.to_string()),
                "redirect" => redirect_chain.push(value.to_string()),
                "final_url" => final_url = Some(value.to_string()),
                "status" => status = Some(value.parse::<u16>().map_err(|e| err(e.to_string()))?),
                "fetched_at" => {
                    fetched_at = Some(
                        DateTime::parse_from_rfc3339(value)
                            .map_err(|e| err(e.to_string()))?
                            .with_timezone(&Utc),
                    )
                }
                "fetch_error" => fetch_error = Some(value.parse::<FetchError>().map_err(err)?),
                "tls_issuer" => issuer = Some(value.to_string()),
                "tls_trusted" => {
                    trusted = Some(value.parse::<bool>().map_err(|e| err(e.to_string()))?)
                }
                "tls_not_before" => {
                    not_before = Some(value.parse::<NaiveDate>().map_err(|e| err(e.to_string()))?)
                }
                "tls_not_after" => {
                    not_after = Some(value.parse::<NaiveDate>().map_err(|e| err(e.to_string()))?)
                }
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }

        let requested_url = requested_url.ok_or(SnapshotError::Parse {
            line: 0,
            reason: "missing requested_url".into(),
        })?;
        let fetched_at = fetched_at.ok_or(SnapshotError::Parse {
            line: 0,
            reason: "missing fetched_at".into(),
        })?;
        let tls = match (issuer, trusted, not_before, not_after) {
            (Some(o), Some(t), Some(nb), Some(na)) => {
                Some(TlsFacts::new(o, t, nb, na, fetched_at.date_naive()))
            }
            (None, None, None, None) => None,
            _ => {
                return Err(SnapshotError::Parse {
                    line: 0,
                    reason: "incomplete tls_* block".into(),
                })
            }
        };
        let snap = PageSnapshot {
            final_url: final_url.unwrap_or_else(|| requested_url.clone()),
            requested_url,
            redirect_chain,
            status,
            body: if fetch_error.is_some() {
                None
            } else {
                Some(body.to_string())
            },
            fetched_at,
            tls,
            fetch_error,
        };
        snap.validate()?;
        Ok(snap)
    }

    pub fn load(path: &Path) -> Result<Self, SnapshotError> {
        let text = std::fs::read_to_string(path).map_err(|source| SnapshotError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_fixture(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "requested_url: http://a.example/\nredirect: http://a.example/\nfinal_url: https://b.example/\nstatus: 200\nfetched_at: 2026-01-15T00:00:00Z\ntls_issuer: Example CA\ntls_trusted: true\ntls_not_before: 2025-01-01\ntls_not_after: 2026-04-01\n\n<html>\n\n<body>hi</body>\n";

    #[test]
    fn parses_header_and_body() {
        let s = PageSnapshot::from_fixture(FIXTURE).unwrap();
        assert_eq!(s.redirect_chain.len(), 1);
        assert_eq!(s.final_url, "https://b.example/");
        assert_eq!(s.status, Some(200));
        assert_eq!(s.body.as_deref(), Some("<html>\n\n<body>hi</body>\n"));
        let tls = s.tls.as_ref().unwrap();
        assert_eq!(tls.certificate_age_days, 379);
        assert!(tls.issuer_trusted);
    }

    #[test]
    fn round_trips() {
        let s = PageSnapshot::from_fixture(FIXTURE).unwrap();
        assert_eq!(s.to_fixture(), FIXTURE);
        let failed = PageSnapshot::failed(
            "http://x.test/",
            FetchError::Timeout,
            DateTime::parse_from_rfc3339("2026-01-15T00:00:00Z")
                .unwrap()
                .into(),
        );
        let back = PageSnapshot::from_fixture(&failed.to_fixture()).unwrap();
        assert_eq!(back, failed);
        assert!(back.no_response());
    }

    #[test]
    fn rejects_broken_invariants() {
        let no_status = "requested_url: http://a/\nfetched_at: 2026-01-15T00:00:00Z\n\nbody";
        assert!(matches!(
            PageSnapshot::from_fixture(no_status),
            Err(SnapshotError::Invariant(_))
        ));
        let bad_chain = "requested_url: http://a/\nredirect: http://z/\nstatus: 200\nfetched_at: 2026-01-15T00:00:00Z\n\n";
        assert!(matches!(
            PageSnapshot::from_fixture(bad_chain),
            Err(SnapshotError::Invariant(_))
        ));
        let unknown = "requested_url: http://a/\nfoo: bar\n\n";
        assert!(matches!(
            PageSnapshot::from_fixture(unknown),
            Err(SnapshotError::Parse { line: 2, .. })
        ));
    }
}
