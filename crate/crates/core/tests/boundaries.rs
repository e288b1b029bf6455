//! Threshold edges for every feature with a numeric cut.

use chrono::{DateTime, Duration, NaiveDate, Utc};

use phishlens::content::{
    feat_links, feat_request_url, feat_ssl, feat_url_anchor, feat_web_forwards, ratio_band,
    LinkCensus, PageSnapshot, TlsFacts, LINKS_BAND, REQUEST_URL_BAND, URL_ANCHOR_BAND,
};
use phishlens::lexical::feat_url_length;
use phishlens::parse_url;
use phishlens::reputation::{
    feat_domain_age, feat_domain_end, feat_web_traffic, RankRecord, WhoisRecord,
};

fn today() -> NaiveDate {
    NaiveDate::from_ymd_opt(2026, 1, 15).unwrap()
}

fn noon() -> DateTime<Utc> {
    today().and_hms_opt(12, 0, 0).unwrap().and_utc()
}

fn url_of_len(n: usize) -> String {
    let base = "http://example.com/";
    format!("{base}{}", "a".repeat(n - base.len()))
}

#[test]
fn url_length_53_54() {
    for (n, want) in [(53, 0), (54, 1), (55, 1)] {
        let u = url_of_len(n);
        assert_eq!(u.len(), n);
        assert_eq!(feat_url_length(&parse_url(&u).unwrap()), want, "{n}");
    }
}

fn redirected(hops: usize) -> PageSnapshot {
    let start = "http://r.example.com/0";
    let chain: Vec<String> = (0..hops)
        .map(|i| format!("http://r.example.com/{i}"))
        .collect();
    PageSnapshot {
        requested_url: start.into(),
        redirect_chain: chain,
        final_url: format!("http://r.example.com/{hops}"),
        status: Some(200),
        body: Some("<p>ok</p>".into()),
        fetched_at: noon(),
        tls: None,
        fetch_error: None,
    }
}

#[test]
fn redirects_3_4() {
    for (hops, want) in [(0, 0), (3, 0), (4, 1), (5, 1)] {
        let s = redirected(hops);
        s.validate().unwrap();
        assert_eq!(feat_web_forwards(&s), want, "{hops}");
    }
}

fn whois(created: Option<NaiveDate>, expires: Option<NaiveDate>) -> WhoisRecord {
    WhoisRecord {
        domain: "edge.example".into(),
        found: true,
        creation_date: created,
        expiration_date: expires,
    }
}

#[test]
fn domain_age_364_366() {
    for (days, want) in [(364, 1), (365, 0), (366, 0)] {
        let w = whois(Some(today() - Duration::days(days)), None);
        assert_eq!(feat_domain_age(&w, today()), want, "{days}");
    }
}

#[test]
fn remaining_registration_182_184() {
    for (days, want) in [(182, 1), (183, 0), (184, 0)] {
        let w = whois(None, Some(today() + Duration::days(days)));
        assert_eq!(feat_domain_end(&w, today()), want, "{days}");
    }
}

#[test]
fn certificate_age_364_365() {
    let p = parse_url("https://tls.example.com/").unwrap();
    for (days, want) in [(364, 1), (365, 0)] {
        let mut s = redirected(0);
        s.tls = Some(TlsFacts::new(
            "CA".into(),
            true,
            today() - Duration::days(days),
            today() + Duration::days(30),
            today(),
        ));
        assert_eq!(feat_ssl(&p, &s), want, "{days}");
    }
}

#[test]
fn rank_cutoff() {
    let r = |rank| RankRecord {
        domain: "x.example".into(),
        rank,
    };
    assert_eq!(feat_web_traffic(&r(Some(100_000))), 0);
    assert_eq!(feat_web_traffic(&r(Some(100_001))), 1);
    assert_eq!(feat_web_traffic(&r(None)), 1);
}

/// Values exactly on either band edge are suspicious; one step outside is not.
#[test]
fn ratio_band_edges() {
    for (low, high) in [REQUEST_URL_BAND, URL_ANCHOR_BAND, LINKS_BAND] {
        let (low, high) = (low as u32, high as u32);
        for scale in [1, 3, 7] {
            let total = 100 * scale;
            assert_eq!(
                ratio_band(low * scale, total, (low.into(), high.into())),
                -1
            );
            assert_eq!(
                ratio_band(high * scale, total, (low.into(), high.into())),
                -1
            );
            assert_eq!(
                ratio_band(low * scale - 1, total, (low.into(), high.into())),
                0
            );
            assert_eq!(
                ratio_band(high * scale + 1, total, (low.into(), high.into())),
                1
            );
        }
    }
}

#[test]
fn ratio_features_at_edges() {
    let req = |part, total| LinkCensus {
        external_request_objects: part,
        total_request_objects: total,
        ..Default::default()
    };
    let anchor = |part, total| LinkCensus {
        suspicious_anchors: part,
        total_anchors: total,
        ..Default::default()
    };
    let msl = |part, total| LinkCensus {
        external_msl_links: part,
        total_msl_links: total,
        ..Default::default()
    };
    // 11/50 is 22% exactly; 21.9% and 61.1% sit just outside.
    assert_eq!(feat_request_url(&req(11, 50)), -1);
    assert_eq!(feat_request_url(&req(219, 1000)), 0);
    assert_eq!(feat_request_url(&req(61, 100)), -1);
    assert_eq!(feat_request_url(&req(611, 1000)), 1);

    assert_eq!(feat_url_anchor(&anchor(31, 100)), -1);
    assert_eq!(feat_url_anchor(&anchor(309, 1000)), 0);
    assert_eq!(feat_url_anchor(&anchor(67, 100)), -1);
    assert_eq!(feat_url_anchor(&anchor(671, 1000)), 1);

    assert_eq!(feat_links(&msl(17, 100)), -1);
    assert_eq!(feat_links(&msl(169, 1000)), 0);
    assert_eq!(feat_links(&msl(81, 100)), -1);
    assert_eq!(feat_links(&msl(811, 1000)), 1);

    // Nothing to count reads as 0%.
    assert_eq!(feat_links(&msl(0, 0)), 0);
}
