//! Synthetic feature rows for training experiments and tests.
//!
//! Each class is a weighted mixture of archetypes. An archetype gives every
//! feature its own distribution, and features are drawn independently within
//! it, except for the page block: an archetype can mark the fetch as failed,
//! which sets the five body features to 1 and the three ratio features to 0
//! together, as real extraction does. Across archetypes the features are
//! therefore dependent, and some archetypes differ only in combinations of
//! features. A fraction of labels is flipped at the end.
//!
//! Output is a pure function of [`SynthConfig`].

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::FeatureRow;
use crate::schema::{Feature, FeatureVector, Label, ValueDomain};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub rows: usize,
    pub phishing_fraction: f64,
    /// Probability that a row's label is flipped.
    pub label_noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            rows: 760,
            phishing_fraction: 0.5,
            label_noise: 0.02,
            seed: 20260115,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Dist {
    /// P(value = 1).
    Bern(f64),
    /// P(-1), P(1); 0 otherwise.
    Tern(f64, f64),
    /// Uniform over an inclusive range.
    Range(i32, i32),
}

struct Archetype {
    name: &'static str,
    weight: u32,
    fetch_failed: f64,
    dists: &'static [(Feature, Dist)],
}

use Dist::*;
use Feature::*;

const LEGIT: &[Archetype] = &[
    Archetype {
        name: "established",
        weight: 45,
        fetch_failed: 0.0,
        dists: &[
            (UrlDepth, Range(0, 5)),
            (Ssl, Tern(0.04, 0.08)),
            (SubDomain, Tern(0.4, 0.05)),
            (RequestUrl, Tern(0.25, 0.08)),
            (UrlAnchor, Tern(0.2, 0.05)),
            (Links, Tern(0.3, 0.1)),
            (PrefixSuffix, Bern(0.1)),
        ],
    },
    Archetype {
        name: "small-business",
        weight: 20,
        fetch_failed: 0.0,
        dists: &[
            (PrefixSuffix, Bern(0.55)),
            (WebTraffic, Bern(0.9)),
            (DomainEnd, Bern(0.6)),
            (DomainAge, Bern(0.1)),
            (Ssl, Tern(0.05, 0.6)),
            (Email, Bern(0.5)),
            (UrlAnchor, Tern(0.2, 0.1)),
        ],
    },
    Archetype {
        name: "unreachable",
        weight: 12,
        fetch_failed: 1.0,
        dists: &[
            (WebTraffic, Bern(0.25)),
            (Ssl, Tern(0.0, 0.5)),
            (DomainEnd, Bern(0.2)),
        ],
    },
    Archetype {
        name: "cdn-heavy",
        weight: 13,
        fetch_failed: 0.0,
        dists: &[
            (RequestUrl, Tern(0.3, 0.6)),
            (Links, Tern(0.3, 0.6)),
            (IFrame, Bern(0.5)),
            (UrlAnchor, Tern(0.3, 0.05)),
            (SubDomain, Tern(0.5, 0.1)),
        ],
    },
    Archetype {
        name: "deep-link",
        weight: 10,
        fetch_failed: 0.0,
        dists: &[
            (UrlLength, Bern(0.9)),
            (UrlDepth, Range(3, 7)),
            (SubDomain, Tern(0.5, 0.2)),
            (Redirection, Bern(0.1)),
        ],
    },
];

const PHISH: &[Archetype] = &[
    Archetype {
        name: "fresh-lookalike",
        weight: 35,
        fetch_failed: 0.0,
        dists: &[
            (PrefixSuffix, Bern(0.8)),
            (WebTraffic, Bern(0.95)),
            (DomainAge, Bern(0.9)),
            (DomainEnd, Bern(0.7)),
            (Ssl, Tern(0.05, 0.85)),
            (SubDomain, Tern(0.3, 0.5)),
            (UrlAnchor, Tern(0.3, 0.5)),
            (RequestUrl, Tern(0.3, 0.4)),
            (Email, Bern(0.4)),
            (HttpsToken, Bern(0.1)),
            (UrlLength, Bern(0.4)),
        ],
    },
    Archetype {
        name: "hosted-platform",
        weight: 20,
        fetch_failed: 0.0,
        dists: &[
            (Ssl, Tern(0.0, 0.7)),
            (RequestUrl, Tern(0.2, 0.6)),
            (UrlAnchor, Tern(0.2, 0.7)),
            (Links, Tern(0.3, 0.4)),
            (Email, Bern(0.6)),
            (IFrame, Bern(0.4)),
            (MouseOver, Bern(0.2)),
            (SubDomain, Tern(0.6, 0.1)),
            (UrlDepth, Range(1, 4)),
        ],
    },
    Archetype {
        name: "shortener",
        weight: 12,
        fetch_failed: 0.1,
        dists: &[
            (TinyUrl, Bern(1.0)),
            (WebForwards, Bern(0.9)),
            (DomainEnd, Bern(0.3)),
            (Ssl, Tern(0.0, 0.6)),
        ],
    },
    Archetype {
        name: "ip-host",
        weight: 10,
        fetch_failed: 0.3,
        dists: &[
            (HavingIp, Bern(1.0)),
            (DnsRecord, Bern(1.0)),
            (WebTraffic, Bern(1.0)),
            (DomainAge, Bern(1.0)),
            (DomainEnd, Bern(1.0)),
            (Ssl, Tern(0.0, 1.0)),
            (RightClick, Bern(0.3)),
        ],
    },
    Archetype {
        name: "taken-down",
        weight: 15,
        fetch_failed: 1.0,
        dists: &[
            (DnsRecord, Bern(0.5)),
            (DomainAge, Bern(0.8)),
            (WebTraffic, Bern(0.9)),
            (PrefixSuffix, Bern(0.6)),
            (Ssl, Tern(0.0, 0.9)),
        ],
    },
    Archetype {
        name: "url-tricks",
        weight: 8,
        fetch_failed: 0.0,
        dists: &[
            (HaveAt, Bern(0.6)),
            (Redirection, Bern(0.5)),
            (HttpsDomain, Bern(0.4)),
            (UrlLength, Bern(0.7)),
            (WebTraffic, Bern(0.6)),
            (DomainAge, Bern(0.5)),
            (Ssl, Tern(0.0, 0.7)),
        ],
    },
];

/// Chance that a feature not named by the archetype departs from 0.
const BACKGROUND: f64 = 0.02;

const PAGE_FLAGS: [Feature; 5] = [IFrame, MouseOver, RightClick, WebForwards, Email];
const PAGE_RATIOS: [Feature; 3] = [RequestUrl, UrlAnchor, Links];

fn draw(d: Dist, rng: &mut ChaCha8Rng) -> i32 {
    match d {
        Bern(p) => rng.random_bool(p) as i32,
        Tern(mid, high) => {
            let u: f64 = rng.random();
            if u < mid {
                -1
            } else if u < mid + high {
                1
            } else {
                0
            }
        }
        Range(lo, hi) => rng.random_range(lo..=hi),
    }
}

fn background(f: Feature) -> Dist {
    match f.domain() {
        ValueDomain::Binary => Bern(BACKGROUND),
        ValueDomain::Ternary => Tern(BACKGROUND, BACKGROUND),
        ValueDomain::Count => Range(0, 3),
    }
}

fn sample_row(a: &Archetype, rng: &mut ChaCha8Rng) -> FeatureVector {
    let mut v = FeatureVector::default();
    for f in Feature::ALL {
        let d = a
            .dists
            .iter()
            .find(|(g, _)| *g == f)
            .map_or(background(f), |(_, d)| *d);
        v[f] = draw(d, rng);
    }
    if rng.random_bool(a.fetch_failed) {
        for f in PAGE_FLAGS {
            v[f] = 1;
        }
        for f in PAGE_RATIOS {
            v[f] = 0;
        }
    }
    v
}

/// Rows in shuffled order. Exactly `round(rows * phishing_fraction)` rows
/// are drawn from phishing archetypes before label noise.
pub fn generate(cfg: &SynthConfig) -> Vec<FeatureRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_phish = (cfg.rows as f64 * cfg.phishing_fraction).round() as usize;
    let mut rows = Vec::with_capacity(cfg.rows);
    for (class, count, mix) in [
        (Label::Legitimate, cfg.rows - n_phish, LEGIT),
        (Label::Phishing, n_phish, PHISH),
    ] {
        let pick = WeightedIndex::new(mix.iter().map(|a| a.weight)).expect("weights are positive");
        for _ in 0..count {
            let a = &mix[pick.sample(&mut rng)];
            let features = sample_row(a, &mut rng);
            let flip = rng.random_bool(cfg.label_noise);
            let label = match (class, flip) {
                (Label::Legitimate, true) => Label::Phishing,
                (Label::Phishing, true) => Label::Legitimate,
                (c, false) => c,
            };
            rows.push(FeatureRow {
                url: format!("https://{}-{:04}.synthetic.invalid/", a.name, rows.len()),
                features,
                label: Some(label),
            });
        }
    }
    rows.shuffle(&mut rng);
    rows
}
