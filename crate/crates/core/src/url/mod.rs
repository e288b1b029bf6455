//! Structural decomposition of raw URL strings.
//!
//! Every feature rule refers to some part of the URL (the domain part, the
//! sub-domain part, the path), so the split happens once here. Parsing is
//! deliberately shallow: what the caller gave is stored as given, apart from
//! lowercasing the host.

mod suffix;

use std::fmt;
use std::net::{Ipv4Addr, Ipv6Addr};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use suffix::PublicSuffixList;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UrlError {
    #[error("empty URL")]
    EmptyInput,
    #[error("malformed URL {url:?}: {reason}")]
    MalformedUrl { url: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Http,
    Https,
    Other,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Http => "http",
            Scheme::Https => "https",
            Scheme::Other => "other",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedUrl {
    /// The input, byte for byte.
    pub raw: String,
    pub scheme: Scheme,
    /// Byte offset into `raw` just past `"://"`; `None` when the scheme was assumed.
    pub authority_offset: Option<usize>,
    /// Lowercased host. IPv6 hosts keep their brackets.
    pub host: String,
    pub is_ip_host: bool,
    pub subdomain: String,
    pub registrable_domain: String,
    pub public_suffix: String,
    pub path_segments: Vec<String>,
    pub query: String,
    pub port: Option<u16>,
}

impl ParsedUrl {
    pub fn is_https(&self) -> bool {
        self.scheme == Scheme::Https
    }

    /// Host rebuilt from its sub-domain and registrable parts.
    pub fn joined_host(&self) -> String {
        if self.is_ip_host {
            self.host.clone()
        } else if self.subdomain.is_empty() {
            self.registrable_domain.clone()
        } else {
            format!("{}.{}", self.subdomain, self.registrable_domain)
        }
    }

    /// Key used to de-duplicate URLs: everything but the host is compared
    /// as given, the host case-insensitively.
    pub fn dedupe_key(&self) -> String {
        let port = self.port.map(|p| format!(":{p}")).unwrap_or_default();
        format!(
            "{}://{}{}/{}?{}",
            self.scheme,
            self.host,
            port,
            self.path_segments.join("/"),
            self.query
        )
    }
}

/// Parse with the bundled public-suffix snapshot.
pub fn parse_url(raw: &str) -> Result<ParsedUrl, UrlError> {
    parse_url_with(raw, PublicSuffixList::bundled())
}

pub fn parse_url_with(raw: &str, psl: &PublicSuffixList) -> Result<ParsedUrl, UrlError> {
    let malformed = |reason: &str| UrlError::MalformedUrl {
        url: raw.to_string(),
        reason: reason.to_string(),
    };

    let lead = raw.len() - raw.trim_start().len();
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(UrlError::EmptyInput);
    }

    let (scheme, authority_offset, rest) = match split_scheme(trimmed) {
        Some((name, rest)) => {
            let scheme = match name.to_ascii_lowercase().as_str() {
                "http" => Scheme::Http,
                "https" => Scheme::Https,
                _ => Scheme::Other,
            };
            (scheme, Some(lead + name.len() + 3), rest)
        }
        None => (Scheme::Http, None, trimmed),
    };

    let authority_end = rest.find(['/', '?', '#']).unwrap_or(rest.len());
    let authority = &rest[..authority_end];
    let tail = &rest[authority_end..];

    // Userinfo ends at the last '@' of the authority.
    let hostport = match authority.rfind('@') {
        Some(i) => &authority[i + 1..],
        None => authority,
    };

    let (host, port_text) = if let Some(after) = hostport.strip_prefix('[') {
        let close = after
            .find(']')
            .ok_or_else(|| malformed("unterminated IPv6 host"))?;
        let inner = &after[..close];
        inner
            .parse::<Ipv6Addr>()
            .map_err(|_| malformed("invalid IPv6 host"))?;
        let rest = &after[close + 1..];
        let port = match rest.strip_prefix(':') {
            Some(p) => Some(p),
            None if rest.is_empty() => None,
            None => return Err(malformed("garbage after IPv6 host")),
        };
        (format!("[{}]", inner.to_lowercase()), port)
    } else {
        match hostport.rfind(':') {
            Some(i) => (hostport[..i].to_lowercase(), Some(&hostport[i + 1..])),
            None => (hostport.to_lowercase(), None),
        }
    };

    let port = match port_text {
        None | Some("") => None,
        Some(p) => Some(p.parse::<u16>().map_err(|_| malformed("invalid port"))?),
    };

    let mut host = host;
    if host.ends_with('.') && !host.starts_with('[') {
        host.pop();
    }
    if host.is_empty() {
        return Err(malformed("empty host"));
    }

    let is_ipv6 = host.starts_with('[');
    let is_ipv4 = !is_ipv6 && host.parse::<Ipv4Addr>().is_ok();
    let is_ip_host = is_ipv4 || is_ipv6;

    let (subdomain, registrable_domain, public_suffix) = if is_ip_host {
        (String::new(), host.clone(), String::new())
    } else {
        validate_host(&host).map_err(malformed)?;
        split_host(&host, psl)
    };

    let path_end = tail.find(['?', '#']).unwrap_or(tail.len());
    let path_segments = tail[..path_end]
        .split('/')
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    let query = match tail[path_end..].strip_prefix('?') {
        Some(q) => q.split('#').next().unwrap_or("").to_string(),
        None => String::new(),
    };

    Ok(ParsedUrl {
        raw: raw.to_string(),
        scheme,
        authority_offset,
        host,
        is_ip_host,
        subdomain,
        registrable_domain,
        public_suffix,
        path_segments,
        query,
        port,
    })
}

/// Remove leading `www` labels from the sub-domain.
pub fn strip_www(p: &ParsedUrl) -> ParsedUrl {
    let mut out = p.clone();
    let mut sub = out.subdomain.as_str();
    loop {
        if sub == "www" {
            sub = "";
        } else if let Some(rest) = sub.strip_prefix("www.") {
            sub = rest;
            continue;
        }
        break;
    }
    out.subdomain = sub.to_string();
    out
}

fn split_scheme(s: &str) -> Option<(&str, &str)> {
    let idx = s.find("://")?;
    let name = &s[..idx];
    let mut chars = name.chars();
    let first = chars.next()?;
    if !first.is_ascii_alphabetic() {
        return None;
    }
    if !chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.')) {
        return None;
    }
    Some((name, &s[idx + 3..]))
}

fn validate_host(host: &str) -> Result<(), &'static str> {
    for label in host.split('.') {
        if label.is_empty() {
            return Err("empty host label");
        }
        if !label
            .chars()
            .all(|c| c.is_alphanumeric() || c == '-' || c == '_')
        {
            return Err("illegal character in host");
        }
    }
    Ok(())
}

fn split_host(host: &str, psl: &PublicSuffixList) -> (String, String, String) {
    match psl.registrable_domain(host) {
        Some(reg) => {
            let suffix = psl.public_suffix(host);
            let sub = host[..host.len() - reg.len()].trim_end_matches('.');
            (sub.to_string(), reg.to_string(), suffix.to_string())
        }
        // The host is itself a public suffix: treat the whole host as the
        // registrable domain under its parent suffix.
        None => {
            let parent = host.split_once('.').map(|(_, p)| p).unwrap_or("");
            (String::new(), host.to_string(), parent.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposes_https_url() {
        let p = parse_url("https://mail.example.com/a/b?x=1").unwrap();
        assert_eq!(p.scheme, Scheme::Https);
        assert_eq!(p.subdomain, "mail");
        assert_eq!(p.registrable_domain, "example.com");
        assert_eq!(p.public_suffix, "com");
        assert_eq!(p.path_segments, vec!["a", "b"]);
        assert_eq!(p.query, "x=1");
        assert_eq!(p.authority_offset, Some(8));
    }

    #[test]
    fn ipv4_host() {
        let p = parse_url("http://115.102.3.123/home.html").unwrap();
        assert!(p.is_ip_host);
        assert_eq!(p.path_segments, vec!["home.html"]);
        assert_eq!(p.subdomain, "");
    }

    #[test]
    fn ipv6_host_with_port() {
        let p = parse_url("http://[2001:DB8::1]:8080/x").unwrap();
        assert!(p.is_ip_host);
        assert_eq!(p.host, "[2001:db8::1]");
        assert_eq!(p.port, Some(8080));
    }

    #[test]
    fn schemeless_defaults_to_http() {
        let p = parse_url("example.co.uk").unwrap();
        assert_eq!(p.scheme, Scheme::Http);
        assert_eq!(p.authority_offset, None);
        assert_eq!(p.registrable_domain, "example.co.uk");
        assert_eq!(p.public_suffix, "co.uk");
        assert_eq!(p.subdomain, "");
    }

    #[test]
    fn userinfo_is_not_host() {
        let p = parse_url("http://evil.com@paypal.com/login").unwrap();
        assert_eq!(p.host, "paypal.com");
    }

    #[test]
    fn host_is_lowercased_raw_is_not() {
        let p = parse_url("HTTP://WWW.Example.COM/Path").unwrap();
        assert_eq!(p.host, "www.example.com");
        assert_eq!(p.raw, "HTTP://WWW.Example.COM/Path");
        assert_eq!(p.path_segments, vec!["Path"]);
    }

    #[test]
    fn errors() {
        assert_eq!(parse_url(""), Err(UrlError::EmptyInput));
        assert_eq!(parse_url("   "), Err(UrlError::EmptyInput));
        assert!(matches!(
            parse_url("http://exa mple.com"),
            Err(UrlError::MalformedUrl { .. })
        ));
        assert!(matches!(
            parse_url("http://a..b.com"),
            Err(UrlError::MalformedUrl { .. })
        ));
        assert!(matches!(
            parse_url("http://[::1/x"),
            Err(UrlError::MalformedUrl { .. })
        ));
        assert!(matches!(
            parse_url("http://a.com:99999/"),
            Err(UrlError::MalformedUrl { .. })
        ));
        assert!(matches!(
            parse_url("http:///path"),
            Err(UrlError::MalformedUrl { .. })
        ));
    }

    #[test]
    fn empty_path_segments_dropped() {
        let p = parse_url("https://a.com/x//y/").unwrap();
        assert_eq!(p.path_segments, vec!["x", "y"]);
    }

    #[test]
    fn host_that_is_a_suffix() {
        let p = parse_url("http://localhost:8970/health").unwrap();
        assert_eq!(p.registrable_domain, "localhost");
        assert_eq!(p.public_suffix, "");
        let p = parse_url("https://www.gov.uk/").unwrap();
        assert_eq!(p.registrable_domain, "www.gov.uk");
        assert_eq!(p.subdomain, "");
    }

    #[test]
    fn strip_www_cases() {
        let mut p = parse_url("http://www.login.example.com").unwrap();
        assert_eq!(p.subdomain, "www.login");
        assert_eq!(strip_www(&p).subdomain, "login");
        p.subdomain = "www".into();
        assert_eq!(strip_www(&p).subdomain, "");
        p.subdomain = "wwwx".into();
        assert_eq!(strip_www(&p).subdomain, "wwwx");
    }
}
