//! Features computed from the URL string alone. No I/O happens here.

use std::collections::BTreeSet;
use std::path::Path;

use crate::schema::{FeatureValue, LEGITIMATE, PHISHING, SUSPICIOUS};
use crate::url::{strip_www, ParsedUrl};

/// URLs at least this long are flagged by `feat_url_length`.
pub const URL_LENGTH_THRESHOLD: usize = 54;

const BUNDLED_SHORTENERS: &str = include_str!("../data/shorteners.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortenerList {
    domains: BTreeSet<String>,
}

impl ShortenerList {
    /// One registrable domain per line, `#` comments.
    pub fn parse(text: &str) -> Result<Self, String> {
        let domains: BTreeSet<String> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(str::to_lowercase)
            .collect();
        if domains.is_empty() {
            return Err("shortener list is empty".into());
        }
        Ok(Self { domains })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_SHORTENERS).expect("bundled shortener list")
    }

    pub fn contains(&self, domain: &str) -> bool {
        self.domains.contains(&domain.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }
}

impl Default for ShortenerList {
    fn default() -> Self {
        Self::bundled()
    }
}

#[derive(Debug, Clone)]
pub struct LexicalConfig {
    pub url_length_threshold: usize,
    pub shorteners: ShortenerList,
}

impl Default for LexicalConfig {
    fn default() -> Self {
        Self {
            url_length_threshold: URL_LENGTH_THRESHOLD,
            shorteners: ShortenerList::bundled(),
        }
    }
}

fn flag(b: bool) -> FeatureValue {
    if b {
        PHISHING
    } else {
        LEGITIMATE
    }
}

pub fn feat_have_at(p: &ParsedUrl) -> FeatureValue {
    flag(p.raw.contains('@'))
}

pub fn feat_url_length(p: &ParsedUrl) -> FeatureValue {
    feat_url_length_with(p, URL_LENGTH_THRESHOLD)
}

pub fn feat_url_length_with(p: &ParsedUrl, threshold: usize) -> FeatureValue {
    flag(p.raw.chars().count() >= threshold)
}

pub fn feat_url_depth(p: &ParsedUrl) -> FeatureValue {
    p.path_segments.len() as FeatureValue
}

/// A `//` anywhere past the scheme separator.
pub fn feat_redirection(p: &ParsedUrl) -> FeatureValue {
    let from = p.authority_offset.unwrap_or(0);
    flag(p.raw.match_indices("//").any(|(i, _)| i >= from))
}

pub fn feat_https_domain(p: &ParsedUrl) -> FeatureValue {
    flag(p.host.contains("http"))
}

pub fn feat_tinyurl(p: &ParsedUrl, shorteners: &ShortenerList) -> FeatureValue {
    flag(shorteners.contains(&p.registrable_domain))
}

pub fn feat_prefix_suffix(p: &ParsedUrl) -> FeatureValue {
    flag(p.registrable_domain.contains('-'))
}

pub fn feat_having_ip(p: &ParsedUrl) -> FeatureValue {
    flag(p.is_ip_host)
}

pub fn feat_https_token(p: &ParsedUrl) -> FeatureValue {
    flag(p.subdomain.contains("http"))
}

/// Dots left in the host once `www` labels are dropped:
/// at most one is legitimate, two suspicious, three or more phishing.
pub fn feat_sub_domain(p: &ParsedUrl) -> FeatureValue {
    let dots = strip_www(p).joined_host().matches('.').count();
    match dots {
        0 | 1 => LEGITIMATE,
        2 => SUSPICIOUS,
        _ => PHISHING,
    }
}

/// The ten URL-only features, keyed by feature.
pub fn lexical_features(
    p: &ParsedUrl,
    cfg: &LexicalConfig,
) -> [(crate::Feature, FeatureValue); 10] {
    use crate::Feature::*;
    [
        (HaveAt, feat_have_at(p)),
        (UrlLength, feat_url_length_with(p, cfg.url_length_threshold)),
        (UrlDepth, feat_url_depth(p)),
        (Redirection, feat_redirection(p)),
        (HttpsDomain, feat_https_domain(p)),
        (TinyUrl, feat_tinyurl(p, &cfg.shorteners)),
        (PrefixSuffix, feat_prefix_suffix(p)),
        (HavingIp, feat_having_ip(p)),
        (HttpsToken, feat_https_token(p)),
        (SubDomain, feat_sub_domain(p)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_url;

    fn p(s: &str) -> ParsedUrl {
        parse_url(s).unwrap()
    }

    #[test]
    fn have_at() {
        assert_eq!(feat_have_at(&p("http://evil.com@paypal.com/login")), 1);
        assert_eq!(feat_have_at(&p("https://example.com/a")), 0);
        assert_eq!(feat_have_at(&p("https://example.com/q?user=a@b.com")), 1);
    }

    #[test]
    fn url_length_boundary() {
        let base = "http://example.com/";
        let u53 = format!("{base}{}", "a".repeat(53 - base.len()));
        let u54 = format!("{base}{}", "a".repeat(54 - base.len()));
        assert_eq!(u53.len(), 53);
        assert_eq!(feat_url_length(&p(&u53)), 0);
        assert_eq!(feat_url_length(&p(&u54)), 1);
        assert_eq!(feat_url_length(&p("http://a.co")), 0);
    }

    #[test]
    fn url_depth() {
        assert_eq!(feat_url_depth(&p("https://a.com/x/y")), 2);
        assert_eq!(feat_url_depth(&p("https://a.com")), 0);
        assert_eq!(feat_url_depth(&p("https://a.com/x//y/")), 2);
    }

    #[test]
    fn redirection() {
        assert_eq!(feat_redirection(&p("http://a.com//http://b.com")), 1);
        assert_eq!(feat_redirection(&p("https://a.com/x")), 0);
        assert_eq!(feat_redirection(&p("https://a.com/r//deep")), 1);
        assert_eq!(feat_redirection(&p("a.com/x")), 0);
        assert_eq!(feat_redirection(&p("a.com//x")), 1);
    }

    #[test]
    fn https_domain() {
        assert_eq!(feat_https_domain(&p("http://https-paypal.com")), 1);
        assert_eq!(feat_https_domain(&p("https://example.com")), 0);
        assert_eq!(feat_https_domain(&p("http://login.http.example.com")), 1);
    }

    #[test]
    fn tinyurl() {
        let s = ShortenerList::bundled();
        assert_eq!(feat_tinyurl(&p("https://bit.ly/3xYz"), &s), 1);
        assert_eq!(feat_tinyurl(&p("https://example.com/bit.ly"), &s), 0);
        assert_eq!(feat_tinyurl(&p("http://tinyurl.com/abc"), &s), 1);
    }

    #[test]
    fn prefix_suffix() {
        assert_eq!(feat_prefix_suffix(&p("http://paypal-secure.com")), 1);
        assert_eq!(feat_prefix_suffix(&p("http://example.com/a-b")), 0);
        assert_eq!(feat_prefix_suffix(&p("http://my-shop.co.uk")), 1);
    }

    #[test]
    fn having_ip() {
        assert_eq!(feat_having_ip(&p("http://115.102.3.123/home.html")), 1);
        assert_eq!(feat_having_ip(&p("http://example.com")), 0);
        assert_eq!(feat_having_ip(&p("http://[2001:db8::1]/x")), 1);
    }

    #[test]
    fn https_token() {
        assert_eq!(feat_https_token(&p("http://https.login.example.com")), 1);
        assert_eq!(feat_https_token(&p("https://mail.example.com")), 0);
        assert_eq!(feat_https_token(&p("http://xhttpx.example.com")), 1);
    }

    #[test]
    fn sub_domain() {
        assert_eq!(feat_sub_domain(&p("http://www.example.com")), 0);
        assert_eq!(feat_sub_domain(&p("http://login.example.com")), -1);
        assert_eq!(feat_sub_domain(&p("http://a.b.example.com")), 1);
        assert_eq!(feat_sub_domain(&p("http://example.com")), 0);
    }

    #[test]
    fn shortener_list_parsing() {
        let s = ShortenerList::parse("# c\nBit.ly\n\n t.co # trailing\n").unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.contains("bit.ly"));
        assert!(ShortenerList::parse("# only comments\n").is_err());
    }
}
