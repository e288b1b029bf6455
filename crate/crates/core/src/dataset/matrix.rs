//! Feature matrix CSV: `url`, the 23 feature names in canonical order, `label`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::schema::{Feature, FeatureVector, Label, FEATURE_COUNT};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub url: String,
    pub features: FeatureVector,
    pub label: Option<Label>,
}

pub fn matrix_header() -> Vec<&'static str> {
    let mut h = Vec::with_capacity(FEATURE_COUNT + 2);
    h.push("url");
    h.extend(Feature::ALL.iter().map(|f| f.name()));
    h.push("label");
    h
}

pub fn write_matrix<W: Write>(rows: &[FeatureRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(matrix_header())?;
    let mut rec: Vec<String> = Vec::with_capacity(FEATURE_COUNT + 2);
    for r in rows {
        rec.clear();
        rec.push(r.url.clone());
        rec.extend(r.features.0.iter().map(|v| v.to_string()));
        rec.push(r.label.map(|l| l.as_u8().to_string()).unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix<R: Read>(input: R) -> Result<Vec<FeatureRow>, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(input);
    let header = rdr.headers().map_err(|e| DatasetError::Malformed {
        line: 1,
        reason: e.to_string(),
    })?;
    let expected = matrix_header();
    if header.len() != expected.len() || header.iter().zip(&expected).any(|(a, b)| a != *b) {
        return Err(DatasetError::SchemaMismatch {
            expected: expected.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let bad = |reason: String| DatasetError::Malformed { line, reason };
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != expected.len() {
            return Err(bad(format!(
                "expected {} fields, got {}",
                expected.len(),
                rec.len()
            )));
        }
        let mut features = FeatureVector::default();
        for (j, f) in Feature::ALL.iter().enumerate() {
            let raw = &rec[j + 1];
            features[*f] = raw
                .trim()
                .parse()
                .map_err(|_| bad(format!("{}: not an integer: {raw:?}", f.name())))?;
        }
        if let Some((f, v)) = features.first_out_of_domain() {
            return Err(bad(format!("{}: value {v} out of domain", f.name())));
        }
        let label = match rec[FEATURE_COUNT + 1].trim() {
            "" => None,
            s => Some(s.parse::<Label>().map_err(bad)?),
        };
        rows.push(FeatureRow {
            url: rec[0].to_string(),
            features,
            label,
        });
    }
    Ok(rows)
}

pub fn save_matrix(rows: &[FeatureRow], path: &Path) -> Result<(), DatasetError> {
    let file = std::fs::File::create(path).map_err(|source| DatasetError::FileUnreadable {
        path: path.display().to_string(),
        source,
    })?;
    write_matrix(rows, std::io::BufWriter::new(file)).map_err(|e| DatasetError::csv(path, e))
}

pub fn load_matrix(path: &Path) -> Result<Vec<FeatureRow>, DatasetError> {
    let file = std::fs::File::open(path).map_err(|source| DatasetError::FileUnreadable {
        path: path.display().to_string(),
        source,
    })?;
    read_matrix(std::io::BufReader::new(file))
}
