//! WHOIS responses: providers and a schema-less parser for the two dates we need.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Duration;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::{debug, warn};

use super::RateLimiter;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhoisRecord {
    pub domain: String,
    pub found: bool,
    pub creation_date: Option<NaiveDate>,
    pub expiration_date: Option<NaiveDate>,
}

impl WhoisRecord {
    pub fn not_found(domain: &str) -> Self {
        Self {
            domain: domain.to_string(),
            found: false,
            creation_date: None,
            expiration_date: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum WhoisError {
    #[error("whois {server}: {source}")]
    Network {
        server: String,
        source: std::io::Error,
    },
    #[error("no whois server known for {0}")]
    NoServer(String),
    #[error("no whois fixture for {0}")]
    NoFixture(String),
}

pub trait WhoisProvider: Send + Sync {
    /// Raw response text for `domain`.
    fn query(&self, domain: &str) -> Result<String, WhoisError>;
}

const CREATION_KEYS: &[&str] = &[
    "creation date",
    "created date",
    "created on",
    "created",
    "registered on",
    "registered",
    "registration date",
    "registration time",
    "domain registration date",
    "domain record activated",
];

const EXPIRY_KEYS: &[&str] = &[
    "registry expiry date",
    "registrar registration expiration date",
    "expiry date",
    "expiration date",
    "expiration time",
    "expires on",
    "expires",
    "expire date",
    "paid-till",
    "domain expiration date",
    "renewal date",
];

const NOT_FOUND: &[&str] = &[
    "no match for",
    "not found",
    "no entries found",
    "no data found",
    "no object found",
    "domain not found",
    "no matching record",
    "status: free",
    "status: available",
];

/// Parse a raw response. The first line whose key names a creation or expiry
/// date wins; dates that do not parse are left absent.
pub fn parse_whois(domain: &str, text: &str) -> WhoisRecord {
    let mut rec = WhoisRecord::not_found(domain);
    let mut any_line = false;
    for line in text.lines() {
        let trimmed = line.trim_start_matches(['%', '#', ' ', '\t', '>']).trim();
        if trimmed.is_empty() {
            continue;
        }
        any_line = true;
        let lower = trimmed.to_ascii_lowercase();
        if NOT_FOUND.iter().any(|p| lower.starts_with(p)) {
            return WhoisRecord::not_found(domain);
        }
        let Some((key, value)) = trimmed.split_once(':') else {
            continue;
        };
        let key = key.trim().to_ascii_lowercase();
        if rec.creation_date.is_none() && CREATION_KEYS.contains(&key.as_str()) {
            rec.creation_date = parse_date(value);
        } else if rec.expiration_date.is_none() && EXPIRY_KEYS.contains(&key.as_str()) {
            rec.expiration_date = parse_date(value);
        }
    }
    rec.found = any_line;
    if let (Some(c), Some(e)) = (rec.creation_date, rec.expiration_date) {
        if c > e {
            rec.expiration_date = None;
        }
    }
    rec
}

pub fn parse_date(value: &str) -> Option<NaiveDate> {
    let v = value.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(v) {
        return Some(dt.date_naive());
    }
    for fmt in [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M:%S%.fZ",
    ] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(v, fmt) {
            return Some(dt.date());
        }
    }
    let first = v.split_whitespace().next()?;
    let first = first.split('T').next().unwrap_or(first);
    for fmt in [
        "%Y-%m-%d", "%d-%b-%Y", "%Y.%m.%d", "%Y/%m/%d", "%d.%m.%Y", "%Y%m%d",
    ] {
        if let Ok(d) = NaiveDate::parse_from_str(first, fmt) {
            return Some(d);
        }
    }
    None
}

/// Query and parse, failing on transport problems rather than folding them.
pub fn try_lookup_whois(
    domain: &str,
    provider: &dyn WhoisProvider,
) -> Result<WhoisRecord, WhoisError> {
    provider
        .query(domain)
        .map(|text| parse_whois(domain, &text))
}

/// Query and parse; any failure becomes a not-found record.
pub fn lookup_whois(domain: &str, provider: &dyn WhoisProvider) -> WhoisRecord {
    try_lookup_whois(domain, provider).unwrap_or_else(|e| {
        match e {
            // Expected offline for domains recorded as unregistered.
            WhoisError::NoFixture(_) => debug!(domain, "no whois fixture"),
            _ => warn!(domain, error = %e, "whois lookup failed"),
        }
        WhoisRecord::not_found(domain)
    })
}

/// Offline provider: `<dir>/<domain>.txt`.
#[derive(Debug, Clone)]
pub struct FixtureWhois {
    pub dir: PathBuf,
}

impl FixtureWhois {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }
}

impl WhoisProvider for FixtureWhois {
    fn query(&self, domain: &str) -> Result<String, WhoisError> {
        let path = self
            .dir
            .join(format!("{}.txt", super::cache::file_stem(domain)));
        std::fs::read_to_string(path).map_err(|_| WhoisError::NoFixture(domain.to_string()))
    }
}

/// Live WHOIS over TCP port 43, following the IANA referral for the TLD.
pub struct TcpWhois {
    pub timeout: Duration,
    pub root_server: String,
    referrals: Mutex<HashMap<String, String>>,
    limiter: RateLimiter,
}

impl TcpWhois {
    pub fn new(timeout: Duration, min_interval: Duration) -> Self {
        Self {
            timeout,
            root_server: "whois.iana.org".into(),
            referrals: Mutex::new(HashMap::new()),
            limiter: RateLimiter::new(min_interval),
        }
    }

    fn ask(&self, server: &str, query: &str) -> Result<String, WhoisError> {
        let net = |source| WhoisError::Network {
            server: server.to_string(),
            source,
        };
        let addr = (server, 43)
            .to_socket_addrs()
            .map_err(net)?
            .next()
            .ok_or_else(|| WhoisError::NoServer(server.to_string()))?;
        self.limiter.wait();
        let mut sock = TcpStream::connect_timeout(&addr, self.timeout).map_err(net)?;
        sock.set_read_timeout(Some(self.timeout)).map_err(net)?;
        sock.write_all(format!("{query}\r\n").as_bytes())
            .map_err(net)?;
        let mut buf = Vec::new();
        sock.take(1 << 20).read_to_end(&mut buf).map_err(net)?;
        Ok(String::from_utf8_lossy(&buf).into_owned())
    }

    fn server_for(&self, domain: &str) -> Result<String, WhoisError> {
        let tld = domain
            .rsplit('.')
            .next()
            .unwrap_or(domain)
            .to_ascii_lowercase();
        if let Some(s) = self.referrals.lock().unwrap().get(&tld) {
            return Ok(s.clone());
        }
        let answer = self.ask(&self.root_server, &tld)?;
        let server = answer
            .lines()
            .find_map(|l| {
                let (k, v) = l.split_once(':')?;
                matches!(k.trim().to_ascii_lowercase().as_str(), "refer" | "whois")
                    .then(|| v.trim().to_string())
            })
            .filter(|s| !s.is_empty())
            .ok_or_else(|| WhoisError::NoServer(domain.to_string()))?;
        self.referrals.lock().unwrap().insert(tld, server.clone());
        Ok(server)
    }
}

impl WhoisProvider for TcpWhois {
    fn query(&self, domain: &str) -> Result<String, WhoisError> {
        let server = self.server_for(domain)?;
        self.ask(&server, domain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn parses_registry_style_response() {
        let text = "   Domain Name: EXAMPLE.COM\n   Creation Date: 2004-01-01T00:00:00Z\n   Registry Expiry Date: 2031-01-01T04:00:00Z\n   Creation Date: 1999-01-01\n";
        let r = parse_whois("example.com", text);
        assert!(r.found);
        assert_eq!(r.creation_date, Some(d(2004, 1, 1)));
        assert_eq!(r.expiration_date, Some(d(2031, 1, 1)));
    }

    #[test]
    fn parses_other_layouts() {
        let nominet = "    Domain name:\n        bbc.co.uk\n\n    Relevant dates:\n        Registered on: before Aug-1996\n        Expiry date:  13-Dec-2026\n";
        let r = parse_whois("bbc.co.uk", nominet);
        assert!(r.found);
        assert_eq!(r.creation_date, None);
        assert_eq!(r.expiration_date, Some(d(2026, 12, 13)));

        let ru = "domain: EXAMPLE.RU\ncreated: 2010.03.04\npaid-till: 2026.03.05\n";
        let r = parse_whois("example.ru", ru);
        assert_eq!(r.creation_date, Some(d(2010, 3, 4)));
        assert_eq!(r.expiration_date, Some(d(2026, 3, 5)));
    }

    #[test]
    fn not_found_patterns() {
        for text in [
            "No match for \"NOPE.COM\".\n>>> Last update of whois database",
            "%% NOT FOUND\n",
            "No entries found for the selected source(s).",
            "",
        ] {
            let r = parse_whois("nope.com", text);
            assert!(!r.found, "{text:?}");
            assert_eq!((r.creation_date, r.expiration_date), (None, None));
        }
    }

    #[test]
    fn inverted_dates_drop_expiry() {
        let r = parse_whois(
            "x.com",
            "Creation Date: 2020-01-01\nExpiration Date: 2019-01-01\n",
        );
        assert_eq!(r.creation_date, Some(d(2020, 1, 1)));
        assert_eq!(r.expiration_date, None);
    }

    #[test]
    fn date_formats() {
        assert_eq!(parse_date("2004-01-01T00:00:00.0Z"), Some(d(2004, 1, 1)));
        assert_eq!(parse_date(" 2004-01-01 12:00:00 "), Some(d(2004, 1, 1)));
        assert_eq!(parse_date("01-Jan-2004"), Some(d(2004, 1, 1)));
        assert_eq!(parse_date("2004/01/01"), Some(d(2004, 1, 1)));
        assert_eq!(parse_date("20040101"), Some(d(2004, 1, 1)));
        assert_eq!(parse_date("sometime last year"), None);
    }

    struct Failing;
    impl WhoisProvider for Failing {
        fn query(&self, domain: &str) -> Result<String, WhoisError> {
            Err(WhoisError::Network {
                server: "x".into(),
                source: std::io::Error::new(std::io::ErrorKind::TimedOut, domain.to_string()),
            })
        }
    }

    #[test]
    fn provider_failure_folds_to_not_found() {
        assert_eq!(
            lookup_whois("a.com", &Failing),
            WhoisRecord::not_found("a.com")
        );
    }
}
