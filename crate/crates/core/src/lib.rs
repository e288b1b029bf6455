//! Phishing URL detection: feature extraction over URLs, fetched pages and
//! registry data, plus native classifiers to turn feature rows into verdicts.

pub mod content;
pub mod dataset;
pub mod lexical;
pub mod ml;
pub mod reputation;
pub mod schema;
pub mod url;

pub use schema::{Feature, FeatureValue, FeatureVector, Label};
pub use url::{parse_url, strip_www, ParsedUrl, UrlError};
