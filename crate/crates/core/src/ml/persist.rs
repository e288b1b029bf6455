//! Model files: one header line, then the model as JSON.
//!
//! ```text
//! PHISHLENS-MODEL 1 random_forest schema=1
//! {"feature_schema_version":1,"model":{...},"metadata":{...}}
//! ```
//!
//! Nothing time-dependent is written, so equal models give equal bytes and
//! the SHA-256 of the file doubles as a model id.

use std::path::Path;

use sha2::{Digest, Sha256};

use super::{MlError, ModelKind, TrainedModel};
use crate::schema::SCHEMA_VERSION;

const MAGIC: &str = "PHISHLENS-MODEL";
const FORMAT_VERSION: u32 = 1;

pub fn model_bytes(model: &TrainedModel) -> Vec<u8> {
    let mut out = format!(
        "{MAGIC} {FORMAT_VERSION} {} schema={}\n",
        model.kind(),
        model.feature_schema_version
    )
    .into_bytes();
    serde_json::to_writer(&mut out, model).expect("model serializes");
    out.push(b'\n');
    out
}

pub fn model_id(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Write the model and return its id.
pub fn save_model(model: &TrainedModel, path: &Path) -> Result<String, MlError> {
    let bytes = model_bytes(model);
    std::fs::write(path, &bytes).map_err(|source| MlError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(model_id(&bytes))
}

pub fn parse_model(bytes: &[u8]) -> Result<TrainedModel, MlError> {
    let corrupt = |m: &str| MlError::CorruptModel(m.to_string());
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| corrupt("missing header"))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| corrupt("header is not text"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let [magic, version, kind, schema] = parts[..] else {
        return Err(corrupt("malformed header"));
    };
    if magic != MAGIC {
        return Err(corrupt("not a model file"));
    }
    if version != FORMAT_VERSION.to_string() {
        return Err(corrupt(&format!("unsupported format version {version}")));
    }
    let header_kind: ModelKind = kind.parse().map_err(|e: String| corrupt(&e))?;
    let schema: u32 = schema
        .strip_prefix("schema=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| corrupt("malformed schema field"))?;
    if schema != SCHEMA_VERSION {
        return Err(MlError::SchemaMismatch {
            expected: SCHEMA_VERSION,
            found: schema,
        });
    }
    let model: TrainedModel =
        serde_json::from_slice(&bytes[nl + 1..]).map_err(|e| corrupt(&e.to_string()))?;
    if model.kind() != header_kind {
        return Err(MlError::KindMismatch {
            expected: header_kind.to_string(),
            found: model.kind().to_string(),
        });
    }
    if model.feature_schema_version != SCHEMA_VERSION {
        return Err(MlError::SchemaMismatch {
            expected: SCHEMA_VERSION,
            found: model.feature_schema_version,
        });
    }
    Ok(model)
}

/// Load a model and its id.
pub fn load_model(path: &Path) -> Result<(TrainedModel, String), MlError> {
    let bytes = std::fs::read(path).map_err(|source| MlError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok((parse_model(&bytes)?, model_id(&bytes)))
}

pub fn load_model_as(path: &Path, expected: ModelKind) -> Result<(TrainedModel, String), MlError> {
    let (m, id) = load_model(path)?;
    if m.kind() != expected {
        return Err(MlError::KindMismatch {
            expected: expected.to_string(),
            found: m.kind().to_string(),
        });
    }
    Ok((m, id))
}
