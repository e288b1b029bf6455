//! Counts of embedded objects, anchors and meta/script/link URLs, split by
//! whether they point away from the page's registrable domain.

use serde::{Deserialize, Serialize};

use super::html::start_tags;
use crate::url::{parse_url, ParsedUrl};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkCensus {
    pub total_request_objects: u32,
    pub external_request_objects: u32,
    pub total_anchors: u32,
    pub suspicious_anchors: u32,
    pub total_msl_links: u32,
    pub external_msl_links: u32,
}

impl LinkCensus {
    /// Scale every count; percentage features must not change.
    pub fn scaled(&self, k: u32) -> LinkCensus {
        LinkCensus {
            total_request_objects: self.total_request_objects * k,
            external_request_objects: self.external_request_objects * k,
            total_anchors: self.total_anchors * k,
            suspicious_anchors: self.suspicious_anchors * k,
            total_msl_links: self.total_msl_links * k,
            external_msl_links: self.external_msl_links * k,
        }
    }
}

const REQUEST_TAGS: [&str; 4] = ["img", "video", "audio", "embed"];

pub fn census(page: &ParsedUrl, body: &str) -> LinkCensus {
    let mut c = LinkCensus::default();
    for tag in start_tags(body) {
        match tag.name.as_str() {
            n if REQUEST_TAGS.contains(&n) => {
                if let Some(src) = tag.attr("src") {
                    c.total_request_objects += 1;
                    if is_external(src, page) {
                        c.external_request_objects += 1;
                    }
                }
            }
            "a" => {
                if let Some(href) = tag.attr("href") {
                    c.total_anchors += 1;
                    if is_suspicious_anchor(href, page) {
                        c.suspicious_anchors += 1;
                    }
                }
            }
            "script" | "link" => {
                let attr = if tag.name == "script" { "src" } else { "href" };
                if let Some(u) = tag.attr(attr) {
                    c.total_msl_links += 1;
                    if is_external(u, page) {
                        c.external_msl_links += 1;
                    }
                }
            }
            "meta" => {
                if let Some(u) = tag.attr("content").and_then(meta_url) {
                    c.total_msl_links += 1;
                    if is_external(u, page) {
                        c.external_msl_links += 1;
                    }
                }
            }
            _ => {}
        }
    }
    c
}

fn is_suspicious_anchor(href: &str, page: &ParsedUrl) -> bool {
    let h = href.trim();
    h.is_empty()
        || h.starts_with('#')
        || h.get(..11)
            .is_some_and(|p| p.eq_ignore_ascii_case("javascript:"))
        || is_external(h, page)
}

/// Whether `reference` names a host outside the page's registrable domain.
/// Relative references and host-less schemes (`mailto:`, `data:`) are internal.
pub fn is_external(reference: &str, page: &ParsedUrl) -> bool {
    let r = reference.trim();
    let absolute = if r.starts_with("//") {
        Some(format!("http:{r}"))
    } else if let Some(i) = r.find("://") {
        let scheme = &r[..i];
        let valid = scheme
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic())
            && scheme
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
        valid.then(|| r.to_string())
    } else {
        None
    };
    match absolute {
        None => false,
        Some(u) => match parse_url(&u) {
            Ok(target) => target.registrable_domain != page.registrable_domain,
            Err(_) => true,
        },
    }
}

/// URL carried by a meta `content` attribute: a refresh target or a bare URL.
fn meta_url(content: &str) -> Option<&str> {
    let c = content.trim();
    let lower = c.to_ascii_lowercase();
    if let Some(i) = lower.find("url=") {
        let u = c[i + 4..].trim().trim_matches(|ch| ch == '\'' || ch == '"');
        return (!u.is_empty()).then_some(u);
    }
    if lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("//") {
        return Some(c);
    }
    None
}
