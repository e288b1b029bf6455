//! Python module `phishlens`.
//!
//! ```python
//! import phishlens
//! m = phishlens.Model.train("matrix.csv", "random_forest", seed=42)
//! m.save("rf.model")
//! feats = phishlens.extract("http://example.com/login", evidence_dir="corpus")
//! label, score = m.predict(feats)
//! ```

use std::collections::HashMap;
use std::path::PathBuf;
use std::time::Duration;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use phishlens::content::FetchConfig;
use phishlens::dataset::{
    extract_url, load_matrix as core_load_matrix, EvidenceDir, EvidenceSource, ExtractConfig,
    LiveEvidence,
};
use phishlens::ml::{self, MlError, ModelKind, TrainConfig, TrainedModel};
use phishlens::reputation::NoRank;
use phishlens::schema::{Feature, FeatureVector, FEATURE_COUNT, SCHEMA_VERSION};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn ml_err(e: MlError) -> PyErr {
    match e {
        MlError::Io { .. } => PyOSError::new_err(e.to_string()),
        other => value_err(other),
    }
}

#[pyfunction]
fn feature_names() -> Vec<&'static str> {
    Feature::ALL.iter().map(|f| f.name()).collect()
}

#[pyfunction]
fn schema_version() -> u32 {
    SCHEMA_VERSION
}

/// Accept a list of 23 ints in canonical order or a dict keyed by name.
fn to_vector(obj: &Bound<'_, PyAny>) -> PyResult<FeatureVector> {
    let mut v = FeatureVector::default();
    if let Ok(d) = obj.cast::<PyDict>() {
        for f in Feature::ALL {
            let item = d
                .get_item(f.name())?
                .ok_or_else(|| value_err(format!("missing feature {}", f.name())))?;
            v.0[f.index()] = item.extract()?;
        }
    } else {
        let xs: Vec<i32> = obj.extract()?;
        if xs.len() != FEATURE_COUNT {
            return Err(value_err(format!(
                "expected {FEATURE_COUNT} values, got {}",
                xs.len()
            )));
        }
        v.0.copy_from_slice(&xs);
    }
    if let Some((f, x)) = v.first_out_of_domain() {
        return Err(value_err(format!("{} = {x} is out of range", f.name())));
    }
    Ok(v)
}

fn evidence(dir: Option<PathBuf>, timeout: f64) -> PyResult<Box<dyn EvidenceSource>> {
    match dir {
        Some(d) => Ok(Box::new(EvidenceDir::open(&d).map_err(value_err)?)),
        None => {
            let fetch = FetchConfig {
                timeout: Duration::from_secs_f64(timeout),
                ..Default::default()
            };
            let cache = std::env::temp_dir().join("phishlens-py-cache");
            let live = LiveEvidence::new(fetch, &cache, Box::new(NoRank))
                .map_err(|e| PyOSError::new_err(e.to_string()))?;
            Ok(Box::new(live))
        }
    }
}

/// Extract all 23 features as a `{name: value}` dict. With `evidence_dir`
/// nothing touches the network.
#[pyfunction]
#[pyo3(signature = (url, evidence_dir=None, timeout=10.0))]
fn extract<'py>(
    py: Python<'py>,
    url: &str,
    evidence_dir: Option<PathBuf>,
    timeout: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let ev = evidence(evidence_dir, timeout)?;
    let x = py
        .detach(|| extract_url(url, ev.as_ref(), &ExtractConfig::default()))
        .map_err(value_err)?;
    let d = PyDict::new(py);
    for (f, v) in x.features.iter() {
        d.set_item(f.name(), v)?;
    }
    Ok(d)
}

/// `(url, [23 ints], label or None)`
type MatrixRow = (String, Vec<i32>, Option<u8>);

/// Rows of a matrix CSV.
#[pyfunction]
fn load_matrix(path: PathBuf) -> PyResult<Vec<MatrixRow>> {
    let rows = core_load_matrix(&path).map_err(value_err)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.url, r.features.0.to_vec(), r.label.map(|l| l.as_u8())))
        .collect())
}

#[pyclass(frozen)]
struct Model {
    inner: TrainedModel,
    id: String,
}

#[pymethods]
impl Model {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let (inner, id) = ml::load_model(&path).map_err(ml_err)?;
        Ok(Self { inner, id })
    }

    /// Fit on a labeled matrix CSV with default hyperparameters.
    #[staticmethod]
    #[pyo3(signature = (matrix, kind="random_forest", seed=42))]
    fn train(py: Python<'_>, matrix: PathBuf, kind: &str, seed: u64) -> PyResult<Self> {
        let kind: ModelKind = kind.parse().map_err(value_err)?;
        let rows = core_load_matrix(&matrix).map_err(value_err)?;
        let inner = py
            .detach(|| ml::train(&rows, &TrainConfig::new(kind, seed)))
            .map_err(ml_err)?;
        let id = ml::model_id(&ml::model_bytes(&inner));
        Ok(Self { inner, id })
    }

    fn save(&self, path: PathBuf) -> PyResult<String> {
        ml::save_model(&self.inner, &path).map_err(ml_err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().as_str()
    }

    #[getter]
    fn model_id(&self) -> &str {
        &self.id
    }

    /// `("safe" | "deceptive", phishing score)`.
    fn predict(&self, features: &Bound<'_, PyAny>) -> PyResult<(&'static str, f64)> {
        let p = self.inner.predict(&to_vector(features)?);
        let class = if p.label.is_phishing() {
            "deceptive"
        } else {
            "safe"
        };
        Ok((class, p.score))
    }

    /// Accuracy, precision, recall, F1 and the macro variants on a matrix.
    fn evaluate(&self, matrix: PathBuf) -> PyResult<HashMap<&'static str, f64>> {
        let rows = core_load_matrix(&matrix).map_err(value_err)?;
        let m = ml::evaluate(&self.inner, &rows).map_err(ml_err)?;
        Ok(HashMap::from([
            ("accuracy", m.accuracy),
            ("precision", m.precision),
            ("recall", m.recall),
            ("f1", m.f1),
            ("macro_precision", m.macro_precision),
            ("macro_recall", m.macro_recall),
            ("macro_f1", m.macro_f1),
        ]))
    }

    fn __repr__(&self) -> String {
        format!("Model(kind={:?}, id={:?})", self.kind(), &self.id[..12])
    }
}

#[pymodule]
#[pyo3(name = "phishlens")]
fn phishlens_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(feature_names, m)?)?;
    m.add_function(wrap_pyfunction!(schema_version, m)?)?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    m.add_function(wrap_pyfunction!(load_matrix, m)?)?;
    m.add_class::<Model>()?;
    Ok(())
}
