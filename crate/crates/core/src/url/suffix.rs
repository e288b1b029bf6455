//! Public-suffix list lookup.
//!
//! Implements the standard matching algorithm: the longest matching rule
//! wins, wildcard rules (`*.ck`) match any single label, exception rules
//! (`!www.ck`) override wildcards, and an unlisted TLD falls back to the
//! implicit `*` rule.

use std::collections::HashSet;
use std::sync::OnceLock;

const BUNDLED_LIST: &str = include_str!("../../data/public_suffix_list.dat");

#[derive(Debug, Clone, Default)]
pub struct PublicSuffixList {
    rules: HashSet<String>,
    wildcards: HashSet<String>,
    exceptions: HashSet<String>,
    version: Option<String>,
}

impl PublicSuffixList {
    /// Parse the canonical text format: one rule per line, `//` comments.
    pub fn parse(text: &str) -> Self {
        let mut list = Self::default();
        for line in text.lines() {
            let line = line.trim();
            if let Some(comment) = line.strip_prefix("//") {
                if let Some(v) = comment.trim().strip_prefix("VERSION:") {
                    list.version = Some(v.trim().to_string());
                }
                continue;
            }
            // Rules end at the first whitespace.
            let rule = match line.split_whitespace().next() {
                Some(r) => r.to_lowercase(),
                None => continue,
            };
            if let Some(exc) = rule.strip_prefix('!') {
                list.exceptions.insert(exc.to_string());
            } else if let Some(base) = rule.strip_prefix("*.") {
                list.wildcards.insert(base.to_string());
            } else {
                list.rules.insert(rule);
            }
        }
        list
    }

    /// The snapshot compiled into the crate.
    pub fn bundled() -> &'static PublicSuffixList {
        static LIST: OnceLock<PublicSuffixList> = OnceLock::new();
        LIST.get_or_init(|| PublicSuffixList::parse(BUNDLED_LIST))
    }

    pub fn version(&self) -> Option<&str> {
        self.version.as_deref()
    }

    pub fn len(&self) -> usize {
        self.rules.len() + self.wildcards.len() + self.exceptions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of trailing labels of `host` that form its public suffix.
    /// `host` must already be lowercased and free of empty labels.
    pub fn suffix_label_count(&self, host: &str) -> usize {
        let labels: Vec<&str> = host.split('.').collect();
        let n = labels.len();
        let mut best = 1; // implicit "*" rule
        for start in 0..n {
            let candidate = labels[start..].join(".");
            let count = n - start;
            if self.exceptions.contains(&candidate) {
                // An exception rule's suffix is the rule minus its leftmost label.
                return count - 1;
            }
            if self.rules.contains(&candidate) {
                best = best.max(count);
            }
            if start + 1 < n {
                let parent = labels[start + 1..].join(".");
                if self.wildcards.contains(&parent) {
                    best = best.max(count);
                }
            }
        }
        best
    }

    /// Public suffix of `host`.
    pub fn public_suffix<'a>(&self, host: &'a str) -> &'a str {
        tail_labels(host, self.suffix_label_count(host))
    }

    /// Registrable domain (suffix plus one label), or `None` when the host
    /// is itself a public suffix.
    pub fn registrable_domain<'a>(&self, host: &'a str) -> Option<&'a str> {
        let n = host.split('.').count();
        let k = self.suffix_label_count(host);
        if k >= n {
            None
        } else {
            Some(tail_labels(host, k + 1))
        }
    }
}

fn tail_labels(host: &str, count: usize) -> &str {
    if count == 0 {
        return "";
    }
    let mut seen = 0;
    for (i, b) in host.bytes().enumerate().rev() {
        if b == b'.' {
            seen += 1;
            if seen == count {
                return &host[i + 1..];
            }
        }
    }
    host
}
