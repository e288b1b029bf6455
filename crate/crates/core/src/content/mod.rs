//! Features that need the fetched page: frames, status-bar and right-click
//! tricks, redirect count, certificate, link census and mail submission.
//!
//! Every feature here folds a missing response to its phishing value.

mod census;
mod fetch;
pub mod html;
mod snapshot;

use regex::Regex;
use std::sync::OnceLock;

pub use census::{census, is_external, LinkCensus};
pub use fetch::{fetch_page, FetchConfig};
pub use snapshot::{FetchError, PageSnapshot, SnapshotError, TlsFacts};

use crate::schema::{Feature, FeatureValue, LEGITIMATE, PHISHING, SUSPICIOUS};
use crate::url::{parse_url, ParsedUrl};

/// Certificates younger than this are not taken as evidence of legitimacy.
pub const MIN_CERT_AGE_DAYS: i64 = 365;
/// More redirects than this flags `Web_Forwards`.
pub const MAX_LEGIT_REDIRECTS: usize = 3;

/// Inclusive bounds (percent) of the suspicious band for each ratio feature.
pub const REQUEST_URL_BAND: (u64, u64) = (22, 61);
pub const URL_ANCHOR_BAND: (u64, u64) = (31, 67);
pub const LINKS_BAND: (u64, u64) = (17, 81);

fn flag(b: bool) -> FeatureValue {
    if b {
        PHISHING
    } else {
        LEGITIMATE
    }
}

fn lowered_body(s: &PageSnapshot) -> Option<String> {
    if s.no_response() {
        None
    } else {
        s.body.as_ref().map(|b| b.to_ascii_lowercase())
    }
}

pub fn feat_iframe(s: &PageSnapshot) -> FeatureValue {
    match lowered_body(s) {
        None => PHISHING,
        Some(b) => flag(b.contains("<iframe") || b.contains("frameborder")),
    }
}

/// `onmouseover` handlers that rewrite `window.status`.
pub fn feat_mouse_over(s: &PageSnapshot) -> FeatureValue {
    let Some(b) = lowered_body(s) else {
        return PHISHING;
    };
    let hit = b.match_indices("onmouseover").any(|(i, _)| {
        let rest = &b[i..];
        let end = rest.find('>').unwrap_or(rest.len()).min(512);
        rest.get(..end).unwrap_or(rest).contains("window.status")
    });
    flag(hit)
}

pub fn feat_right_click(s: &PageSnapshot) -> FeatureValue {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"event\.button\s*===?\s*2").unwrap());
    match lowered_body(s) {
        None => PHISHING,
        Some(b) => flag(re.is_match(&b)),
    }
}

pub fn feat_web_forwards(s: &PageSnapshot) -> FeatureValue {
    flag(s.no_response() || s.redirect_chain.len() > MAX_LEGIT_REDIRECTS)
}

/// https with a trusted certificate at least a year old is legitimate,
/// https with an untrusted issuer suspicious, anything else phishing.
pub fn feat_ssl(p: &ParsedUrl, s: &PageSnapshot) -> FeatureValue {
    if !p.is_https() {
        return PHISHING;
    }
    match &s.tls {
        Some(t) if !t.issuer_trusted => SUSPICIOUS,
        Some(t) if t.certificate_age_days >= MIN_CERT_AGE_DAYS => LEGITIMATE,
        _ => PHISHING,
    }
}

/// Ratio banding with exact integer comparison: below `low` percent is
/// legitimate, `low..=high` suspicious, above `high` phishing. An empty
/// denominator counts as 0%.
pub fn ratio_band(part: u32, total: u32, (low, high): (u64, u64)) -> FeatureValue {
    if total == 0 {
        return LEGITIMATE;
    }
    let scaled = 100 * u64::from(part);
    let total = u64::from(total);
    if scaled < low * total {
        LEGITIMATE
    } else if scaled <= high * total {
        SUSPICIOUS
    } else {
        PHISHING
    }
}

pub fn feat_request_url(c: &LinkCensus) -> FeatureValue {
    ratio_band(
        c.external_request_objects,
        c.total_request_objects,
        REQUEST_URL_BAND,
    )
}

pub fn feat_url_anchor(c: &LinkCensus) -> FeatureValue {
    ratio_band(c.suspicious_anchors, c.total_anchors, URL_ANCHOR_BAND)
}

pub fn feat_links(c: &LinkCensus) -> FeatureValue {
    ratio_band(c.external_msl_links, c.total_msl_links, LINKS_BAND)
}

pub fn feat_email(s: &PageSnapshot) -> FeatureValue {
    match lowered_body(s) {
        None => PHISHING,
        Some(b) => flag(b.contains("mail(") || b.contains("mailto:")),
    }
}

/// Census of the page that was actually served: the landing URL after
/// redirects, falling back to the requested URL.
pub fn snapshot_census(requested: &ParsedUrl, s: &PageSnapshot) -> LinkCensus {
    let Some(body) = s.body.as_deref().filter(|_| !s.no_response()) else {
        return LinkCensus::default();
    };
    match parse_url(&s.final_url) {
        Ok(landing) => census(&landing, body),
        Err(_) => census(requested, body),
    }
}

/// The nine page features, keyed by feature.
pub fn content_features(p: &ParsedUrl, s: &PageSnapshot) -> [(Feature, FeatureValue); 9] {
    let c = snapshot_census(p, s);
    [
        (Feature::IFrame, feat_iframe(s)),
        (Feature::MouseOver, feat_mouse_over(s)),
        (Feature::RightClick, feat_right_click(s)),
        (Feature::WebForwards, feat_web_forwards(s)),
        (Feature::Ssl, feat_ssl(p, s)),
        (Feature::RequestUrl, feat_request_url(&c)),
        (Feature::UrlAnchor, feat_url_anchor(&c)),
        (Feature::Links, feat_links(&c)),
        (Feature::Email, feat_email(s)),
    ]
}
