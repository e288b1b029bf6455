//! Wire types shared by the service, the history log and the CLI.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use phishlens::ml::Prediction;
use phishlens::{Feature, FeatureVector, Label};

/// Bumped on any incompatible change to request or response bodies.
pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Safe,
    Deceptive,
}

impl Class {
    pub fn of_score(score: f64) -> Self {
        if score >= 0.5 {
            Class::Deceptive
        } else {
            Class::Safe
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Class::Safe => "safe",
            Class::Deceptive => "deceptive",
        }
    }

    pub fn label(self) -> Label {
        match self {
            Class::Safe => Label::Legitimate,
            Class::Deceptive => Label::Phishing,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The 23 values as a JSON object keyed by feature name, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NamedFeatures(pub FeatureVector);

impl Serialize for NamedFeatures {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(Feature::ALL.len()))?;
        for (f, v) in self.0.iter() {
            m.serialize_entry(f.name(), &v)?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for NamedFeatures {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = NamedFeatures;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object with all 23 feature values")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<NamedFeatures, A::Error> {
                let mut out = FeatureVector::default();
                let mut seen = [false; Feature::ALL.len()];
                while let Some(name) = map.next_key::<String>()? {
                    let f = Feature::from_name(&name)
                        .ok_or_else(|| de::Error::custom(format!("unknown feature {name:?}")))?;
                    let v: i32 = map.next_value()?;
                    if !f.domain().contains(v) {
                        return Err(de::Error::custom(format!("{name} = {v} out of range")));
                    }
                    out.0[f.index()] = v;
                    seen[f.index()] = true;
                }
                if let Some(i) = seen.iter().position(|s| !s) {
                    return Err(de::Error::custom(format!(
                        "missing feature {}",
                        Feature::ALL[i].name()
                    )));
                }
                Ok(NamedFeatures(out))
            }
        }
        d.deserialize_map(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    /// Digest of url, class, score, features and model id. Recomputed on
    /// receipt, so clients may omit it.
    #[serde(default)]
    pub id: String,
    pub url: String,
    pub class: Class,
    pub score: f64,
    pub features: NamedFeatures,
    pub model_id: String,
    pub latency_ms: f64,
    pub timestamp: DateTime<Utc>,
}

impl Verdict {
    pub fn new(
        url: &str,
        features: FeatureVector,
        prediction: Prediction,
        model_id: &str,
        latency_ms: f64,
        timestamp: DateTime<Utc>,
    ) -> Self {
        let mut v = Verdict {
            id: String::new(),
            url: url.to_string(),
            class: Class::of_score(prediction.score),
            score: prediction.score,
            features: NamedFeatures(features),
            model_id: model_id.to_string(),
            latency_ms,
            timestamp,
        };
        v.id = v.digest();
        v
    }

    pub fn digest(&self) -> String {
        let canonical = serde_json::json!({
            "url": self.url,
            "class": self.class,
            "score": self.score,
            "features": self.features,
            "model_id": self.model_id,
        });
        let mut h = Sha256::new();
        h.update(canonical.to_string().as_bytes());
        hex::encode(&h.finalize()[..16])
    }

    /// Check the invariants a client-supplied verdict must meet and reset
    /// its id to the digest.
    pub fn normalize(&mut self) -> Result<(), String> {
        if self.url.trim().is_empty() {
            return Err("verdict url is empty".into());
        }
        if !(0.0..=1.0).contains(&self.score) {
            return Err(format!("score {} outside [0, 1]", self.score));
        }
        if self.class != Class::of_score(self.score) {
            return Err(format!(
                "class {} does not match score {}",
                self.class, self.score
            ));
        }
        if !self.latency_ms.is_finite() || self.latency_ms < 0.0 {
            return Err("latency_ms must be a non-negative number".into());
        }
        self.id = self.digest();
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserAction {
    Visited,
    Declined,
    None,
}

impl UserAction {
    pub fn as_str(self) -> &'static str {
        match self {
            UserAction::Visited => "visited",
            UserAction::Declined => "declined",
            UserAction::None => "none",
        }
    }
}

impl FromStr for UserAction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "visited" => Ok(UserAction::Visited),
            "declined" => Ok(UserAction::Declined),
            "none" => Ok(UserAction::None),
            other => Err(format!(
                "unknown user_action {other:?} (expected visited, declined or none)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub verdict: Verdict,
    pub user_action: UserAction,
    /// When the entry was appended; never decreases within one log file.
    pub recorded_at: DateTime<Utc>,
}
