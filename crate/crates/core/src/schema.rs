//! The 23-feature schema shared by extraction, the matrix format and the
//! models.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Bumped whenever the feature list or its order changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const FEATURE_COUNT: usize = 23;

/// A feature value. Rule features use 1 = phishing, 0 = legitimate,
/// -1 = suspicious; `UrlDepth` is a plain count.
pub type FeatureValue = i32;

pub const PHISHING: FeatureValue = 1;
pub const LEGITIMATE: FeatureValue = 0;
pub const SUSPICIOUS: FeatureValue = -1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueDomain {
    Binary,
    Ternary,
    Count,
}

impl ValueDomain {
    pub fn contains(self, v: FeatureValue) -> bool {
        match self {
            ValueDomain::Binary => v == 0 || v == 1,
            ValueDomain::Ternary => (-1..=1).contains(&v),
            ValueDomain::Count => v >= 0,
        }
    }
}

macro_rules! features {
    ($($variant:ident => $name:literal, $domain:ident;)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Feature {
            $($variant,)*
        }

        impl Feature {
            pub const ALL: [Feature; FEATURE_COUNT] = [$(Feature::$variant,)*];

            /// Column name in the matrix header.
            pub fn name(self) -> &'static str {
                match self {
                    $(Feature::$variant => $name,)*
                }
            }

            pub fn domain(self) -> ValueDomain {
                match self {
                    $(Feature::$variant => ValueDomain::$domain,)*
                }
            }
        }
    };
}

features! {
    HaveAt => "Have_At", Binary;
    UrlLength => "URL_Length", Binary;
    UrlDepth => "URL_Depth", Count;
    Redirection => "Redirection", Binary;
    HttpsDomain => "https_Domain", Binary;
    TinyUrl => "TinyURL", Binary;
    PrefixSuffix => "Prefix/Suffix", Binary;
    DnsRecord => "DNS_Record", Binary;
    WebTraffic => "Web_Traffic", Binary;
    DomainAge => "Domain_Age", Binary;
    DomainEnd => "Domain_End", Binary;
    IFrame => "iFrame", Binary;
    MouseOver => "Mouse_Over", Binary;
    RightClick => "Right_Click", Binary;
    WebForwards => "Web_Forwards", Binary;
    HavingIp => "having_ip", Binary;
    Ssl => "SSL", Ternary;
    HttpsToken => "https_token", Binary;
    SubDomain => "sub_domain", Ternary;
    RequestUrl => "request_url", Ternary;
    UrlAnchor => "url_anchor", Ternary;
    Links => "links", Ternary;
    Email => "email", Binary;
}

impl Feature {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_name(name: &str) -> Option<Feature> {
        Feature::ALL.iter().copied().find(|f| f.name() == name)
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// All 23 values in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FeatureVector(pub [FeatureValue; FEATURE_COUNT]);

impl FeatureVector {
    pub fn values(&self) -> &[FeatureValue; FEATURE_COUNT] {
        &self.0
    }

    /// First feature whose value lies outside its declared domain.
    pub fn first_out_of_domain(&self) -> Option<(Feature, FeatureValue)> {
        Feature::ALL
            .iter()
            .map(|&f| (f, self[f]))
            .find(|&(f, v)| !f.domain().contains(v))
    }

    pub fn as_f64(&self) -> [f64; FEATURE_COUNT] {
        self.0.map(f64::from)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Feature, FeatureValue)> + '_ {
        Feature::ALL.iter().map(move |&f| (f, self[f]))
    }
}

impl Index<Feature> for FeatureVector {
    type Output = FeatureValue;
    fn index(&self, f: Feature) -> &FeatureValue {
        &self.0[f.index()]
    }
}

impl IndexMut<Feature> for FeatureVector {
    fn index_mut(&mut self, f: Feature) -> &mut FeatureValue {
        &mut self.0[f.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Legitimate = 0,
    Phishing = 1,
}

impl Label {
    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Option<Label> {
        match v {
            0 => Some(Label::Legitimate),
            1 => Some(Label::Phishing),
            _ => None,
        }
    }

    pub fn is_phishing(self) -> bool {
        self == Label::Phishing
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "0" | "legit" | "legitimate" | "safe" => Ok(Label::Legitimate),
            "1" | "phish" | "phishing" | "deceptive" => Ok(Label::Phishing),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order() {
        let names: Vec<_> = Feature::ALL.iter().map(|f| f.name()).collect();
        assert_eq!(names.len(), 23);
        assert_eq!(names[0], "Have_At");
        assert_eq!(names[6], "Prefix/Suffix");
        assert_eq!(names[16], "SSL");
        assert_eq!(names[22], "email");
        for (i, f) in Feature::ALL.iter().enumerate() {
            assert_eq!(f.index(), i);
            assert_eq!(Feature::from_name(f.name()), Some(*f));
        }
    }

    #[test]
    fn domains() {
        let ternary: Vec<_> = Feature::ALL
            .iter()
            .filter(|f| f.domain() == ValueDomain::Ternary)
            .map(|f| f.name())
            .collect();
        assert_eq!(
            ternary,
            ["SSL", "sub_domain", "request_url", "url_anchor", "links"]
        );
        assert!(!ValueDomain::Binary.contains(-1));
        assert!(ValueDomain::Count.contains(17));
        let mut v = FeatureVector::default();
        assert_eq!(v.first_out_of_domain(), None);
        v[Feature::Email] = 2;
        assert_eq!(v.first_out_of_domain(), Some((Feature::Email, 2)));
    }
}
