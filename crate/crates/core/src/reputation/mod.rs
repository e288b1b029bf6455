//! Registry and traffic features: DNS record, popularity rank, domain age and
//! remaining registration.

pub mod cache;
pub mod rank;
pub mod whois;

use std::sync::Mutex;
use std::time::{Duration, Instant};

use chrono::NaiveDate;

pub use cache::{CachedRank, CachedWhois, DiskCache, DEFAULT_TTL_DAYS};
pub use rank::{NoRank, RankError, RankProvider, RankRecord, RankSnapshot};
pub use whois::{
    lookup_whois, parse_whois, FixtureWhois, TcpWhois, WhoisError, WhoisProvider, WhoisRecord,
};

use crate::schema::{Feature, FeatureValue, LEGITIMATE, PHISHING};

/// "12 months".
pub const MIN_DOMAIN_AGE_DAYS: i64 = 365;
/// "6 months".
pub const MIN_REMAINING_DAYS: i64 = 183;
pub const POPULARITY_CUTOFF: u32 = 100_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReputationConfig {
    /// Use the inverted rank inequality (popular ⇒ phishing).
    pub web_traffic_literal: bool,
}

pub fn feat_dns_record(w: &WhoisRecord) -> FeatureValue {
    if w.found {
        LEGITIMATE
    } else {
        PHISHING
    }
}

pub fn feat_domain_age(w: &WhoisRecord, now: NaiveDate) -> FeatureValue {
    match w.creation_date {
        Some(c) if (now - c).num_days() >= MIN_DOMAIN_AGE_DAYS => LEGITIMATE,
        _ => PHISHING,
    }
}

pub fn feat_domain_end(w: &WhoisRecord, now: NaiveDate) -> FeatureValue {
    match w.expiration_date {
        Some(e) if (e - now).num_days() >= MIN_REMAINING_DAYS => LEGITIMATE,
        _ => PHISHING,
    }
}

pub fn feat_web_traffic(r: &RankRecord) -> FeatureValue {
    match r.rank {
        Some(rank) if rank <= POPULARITY_CUTOFF => LEGITIMATE,
        _ => PHISHING,
    }
}

pub fn feat_web_traffic_literal(r: &RankRecord) -> FeatureValue {
    match r.rank {
        Some(rank) if rank >= POPULARITY_CUTOFF => LEGITIMATE,
        _ => PHISHING,
    }
}

pub fn reputation_features(
    w: &WhoisRecord,
    r: &RankRecord,
    now: NaiveDate,
    cfg: ReputationConfig,
) -> [(Feature, FeatureValue); 4] {
    let traffic = if cfg.web_traffic_literal {
        feat_web_traffic_literal(r)
    } else {
        feat_web_traffic(r)
    };
    [
        (Feature::DnsRecord, feat_dns_record(w)),
        (Feature::WebTraffic, traffic),
        (Feature::DomainAge, feat_domain_age(w, now)),
        (Feature::DomainEnd, feat_domain_end(w, now)),
    ]
}

/// Spaces calls at least `min_interval` apart across threads.
#[derive(Debug)]
pub struct RateLimiter {
    min_interval: Duration,
    next: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn new(min_interval: Duration) -> Self {
        Self {
            min_interval,
            next: Mutex::new(None),
        }
    }

    pub fn wait(&self) {
        let slot = {
            let mut next = self.next.lock().unwrap();
            let now = Instant::now();
            let slot = next.map_or(now, |n| n.max(now));
            *next = Some(slot + self.min_interval);
            slot
        };
        let now = Instant::now();
        if slot > now {
            std::thread::sleep(slot - now);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Days;

    fn now() -> NaiveDate {
        NaiveDate::from_ymd_opt(2026, 1, 15).unwrap()
    }

    fn whois(created_days_ago: Option<u64>, expires_in: Option<i64>) -> WhoisRecord {
        WhoisRecord {
            domain: "x.com".into(),
            found: true,
            creation_date: created_days_ago.map(|d| now() - Days::new(d)),
            expiration_date: expires_in.map(|d| now() + chrono::Duration::days(d)),
        }
    }

    fn ranked(rank: Option<u32>) -> RankRecord {
        RankRecord {
            domain: "x.com".into(),
            rank,
        }
    }

    #[test]
    fn dns_record() {
        assert_eq!(feat_dns_record(&whois(None, None)), 0);
        assert_eq!(feat_dns_record(&WhoisRecord::not_found("x.com")), 1);
    }

    #[test]
    fn domain_age() {
        assert_eq!(feat_domain_age(&whois(Some(182), None), now()), 1);
        assert_eq!(feat_domain_age(&whois(Some(730), None), now()), 0);
        assert_eq!(feat_domain_age(&whois(None, None), now()), 1);
        assert_eq!(feat_domain_age(&whois(Some(364), None), now()), 1);
        assert_eq!(feat_domain_age(&whois(Some(365), None), now()), 0);
        assert_eq!(feat_domain_age(&whois(Some(366), None), now()), 0);
    }

    #[test]
    fn domain_end() {
        assert_eq!(feat_domain_end(&whois(None, Some(60)), now()), 1);
        assert_eq!(feat_domain_end(&whois(None, Some(5 * 365)), now()), 0);
        assert_eq!(feat_domain_end(&whois(None, Some(-5)), now()), 1);
        assert_eq!(feat_domain_end(&whois(None, None), now()), 1);
        assert_eq!(feat_domain_end(&whois(None, Some(182)), now()), 1);
        assert_eq!(feat_domain_end(&whois(None, Some(183)), now()), 0);
        assert_eq!(feat_domain_end(&whois(None, Some(184)), now()), 0);
    }

    #[test]
    fn web_traffic() {
        assert_eq!(feat_web_traffic(&ranked(Some(1))), 0);
        assert_eq!(feat_web_traffic(&ranked(None)), 1);
        assert_eq!(feat_web_traffic(&ranked(Some(5_000_000))), 1);
        assert_eq!(feat_web_traffic(&ranked(Some(100_000))), 0);
        assert_eq!(feat_web_traffic(&ranked(Some(100_001))), 1);
    }

    #[test]
    fn web_traffic_literal_variant() {
        let cfg = ReputationConfig {
            web_traffic_literal: true,
        };
        let w = whois(Some(1000), Some(1000));
        let traffic = |r| reputation_features(&w, &ranked(r), now(), cfg)[1].1;
        assert_eq!(traffic(Some(1)), 1);
        assert_eq!(traffic(Some(100_000)), 0);
        assert_eq!(traffic(None), 1);
    }

    #[test]
    fn rate_limiter_spaces_calls() {
        let l = RateLimiter::new(Duration::from_millis(20));
        let t = Instant::now();
        for _ in 0..4 {
            l.wait();
        }
        assert!(t.elapsed() >= Duration::from_millis(60));
    }
}
