//! Labeled feeds in, feature matrices out.

mod extract;
mod ingest;
mod matrix;
pub mod synth;

use std::path::Path;

use thiserror::Error;

pub use extract::{
    extract_all, extract_url, EvidenceDir, EvidenceSource, ExtractConfig, ExtractReport,
    Extraction, LiveEvidence,
};
pub use ingest::{ingest_feed, load_labeled, save_labeled, LabeledUrl};
pub use matrix::{load_matrix, matrix_header, read_matrix, save_matrix, write_matrix, FeatureRow};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    FileUnreadable {
        path: String,
        source: std::io::Error,
    },
    #[error("no urls found in {0}")]
    NoUrlsFound(String),
    #[error("column mismatch: expected [{expected}], found [{found}]")]
    SchemaMismatch { expected: String, found: String },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("evidence dir {path}: {reason}")]
    Evidence { path: String, reason: String },
    #[error("extraction failed for all {0} urls")]
    TotalFailure(usize),
    #[error("{0}")]
    Internal(String),
}

impl DatasetError {
    fn csv(path: &Path, e: csv::Error) -> Self {
        let line = e.position().map_or(0, |p| p.line() as usize);
        match e.into_kind() {
            csv::ErrorKind::Io(source) => DatasetError::FileUnreadable {
                path: path.display().to_string(),
                source,
            },
            other => DatasetError::Malformed {
                line,
                reason: format!("{other:?}"),
            },
        }
    }
}
