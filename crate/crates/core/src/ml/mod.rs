//! Native classifiers over feature rows: categorical Naive-Bayes, logistic
//! regression and a random forest, with cross-validation and grid search.

pub mod cv;
pub mod forest;
pub mod logistic;
pub mod metrics;
pub mod nb;
pub mod persist;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cv::{
    cross_validate, default_grid, grid_search, k_fold_split, parse_grid, CvResult, Fold, Grid,
    GridResult, GridRow,
};
pub use forest::{Forest, RfParams};
pub use logistic::{Logistic, LrParams};
pub use metrics::{Confusion, Metrics, MetricsSummary};
pub use nb::{NaiveBayes, NbParams};
pub use persist::{load_model, load_model_as, model_bytes, model_id, save_model};

use crate::dataset::FeatureRow;
use crate::schema::{FeatureVector, Label, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum MlError {
    #[error("training data must contain both classes")]
    SingleClassData,
    #[error("row {0} has no label")]
    UnlabeledRow(usize),
    #[error("no rows")]
    EmptyInput,
    #[error("invalid hyperparameter {name}: {reason}")]
    InvalidParam { name: String, reason: String },
    #[error("expected a {expected} model, found {found}")]
    KindMismatch { expected: String, found: String },
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
    #[error("feature schema {found} does not match {expected}")]
    SchemaMismatch { expected: u32, found: u32 },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    NaiveBayes,
    Logistic,
    RandomForest,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [
        ModelKind::NaiveBayes,
        ModelKind::Logistic,
        ModelKind::RandomForest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::NaiveBayes => "naive_bayes",
            ModelKind::Logistic => "logistic",
            ModelKind::RandomForest => "random_forest",
        }
    }

    /// Name used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::NaiveBayes => "Naive-Bayes",
            ModelKind::Logistic => "Logistic Regression",
            ModelKind::RandomForest => "Random Forest",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "naive_bayes" | "nb" => Ok(ModelKind::NaiveBayes),
            "logistic" | "lr" | "logistic_regression" => Ok(ModelKind::Logistic),
            "random_forest" | "rf" => Ok(ModelKind::RandomForest),
            other => Err(format!("unknown model kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hyperparams {
    NaiveBayes(NbParams),
    Logistic(LrParams),
    RandomForest(RfParams),
}

impl Hyperparams {
    pub fn defaults(kind: ModelKind) -> Self {
        match kind {
            ModelKind::NaiveBayes => Hyperparams::NaiveBayes(NbParams::default()),
            ModelKind::Logistic => Hyperparams::Logistic(LrParams::default()),
            ModelKind::RandomForest => Hyperparams::RandomForest(RfParams::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Hyperparams::NaiveBayes(_) => ModelKind::NaiveBayes,
            Hyperparams::Logistic(_) => ModelKind::Logistic,
            Hyperparams::RandomForest(_) => ModelKind::RandomForest,
        }
    }

    /// Defaults for `kind` overridden by `name → value` pairs.
    pub fn from_map(kind: ModelKind, map: &BTreeMap<String, String>) -> Result<Self, MlError> {
        let mut h = Self::defaults(kind);
        for (k, v) in map {
            h.set(k, v)?;
        }
        h.validate()?;
        Ok(h)
    }

    pub fn set(&mut self, name: &str, value: &str) -> Result<(), MlError> {
        let bad = |reason: &str| MlError::InvalidParam {
            name: name.to_string(),
            reason: reason.to_string(),
        };
        let float = || {
            value
                .trim()
                .parse::<f64>()
                .map_err(|_| bad("expected a number"))
        };
        let int = || {
            value
                .trim()
                .parse::<usize>()
                .map_err(|_| bad("expected a non-negative integer"))
        };
        match (self, name) {
            (Hyperparams::NaiveBayes(p), "smoothing") => p.smoothing = float()?,
            (Hyperparams::Logistic(p), "learning_rate") => p.learning_rate = float()?,
            (Hyperparams::Logistic(p), "l2") => p.l2 = float()?,
            (Hyperparams::Logistic(p), "epochs") => p.epochs = int()?,
            (Hyperparams::RandomForest(p), "n_trees") => p.n_trees = int()?,
            (Hyperparams::RandomForest(p), "min_samples_split") => p.min_samples_split = int()?,
            (Hyperparams::RandomForest(p), "features_per_split") => p.features_per_split = int()?,
            (Hyperparams::RandomForest(p), "max_depth") => {
                p.max_depth = match value.trim().to_ascii_lowercase().as_str() {
                    "inf" | "none" | "unbounded" | "∞" => None,
                    _ => Some(int()?),
                }
            }
            _ => return Err(bad("not a parameter of this model kind")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), MlError> {
        let bad = |name: &str, reason: &str| {
            Err(MlError::InvalidParam {
                name: name.to_string(),
                reason: reason.to_string(),
            })
        };
        match self {
            Hyperparams::NaiveBayes(p) if !(p.smoothing > 0.0 && p.smoothing.is_finite()) => {
                bad("smoothing", "must be > 0")
            }
            Hyperparams::Logistic(p) if !(p.learning_rate > 0.0 && p.learning_rate.is_finite()) => {
                bad("learning_rate", "must be > 0")
            }
            Hyperparams::Logistic(p) if !(p.l2 >= 0.0 && p.l2.is_finite()) => {
                bad("l2", "must be >= 0")
            }
            Hyperparams::RandomForest(p) if p.n_trees == 0 => bad("n_trees", "must be >= 1"),
            Hyperparams::RandomForest(p) if p.features_per_split == 0 => {
                bad("features_per_split", "must be >= 1")
            }
            Hyperparams::RandomForest(p) if p.max_depth == Some(0) => {
                bad("max_depth", "must be >= 1")
            }
            _ => Ok(()),
        }
    }

    /// `name=value` pairs joined with `;`, for reports.
    pub fn describe(&self) -> String {
        match self {
            Hyperparams::NaiveBayes(p) => format!("smoothing={}", p.smoothing),
            Hyperparams::Logistic(p) => {
                format!(
                    "learning_rate={};l2={};epochs={}",
                    p.learning_rate, p.l2, p.epochs
                )
            }
            Hyperparams::RandomForest(p) => format!(
                "n_trees={};max_depth={};min_samples_split={};features_per_split={}",
                p.n_trees,
                p.max_depth.map_or("inf".to_string(), |d| d.to_string()),
                p.min_samples_split,
                p.features_per_split
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub seed: u64,
    pub params: Hyperparams,
}

impl TrainConfig {
    pub fn new(kind: ModelKind, seed: u64) -> Self {
        Self {
            seed,
            params: Hyperparams::defaults(kind),
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "snake_case")]
pub enum ModelParams {
    NaiveBayes(NaiveBayes),
    Logistic(Logistic),
    RandomForest(Forest),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub seed: u64,
    pub config: TrainConfig,
    pub rows: usize,
    /// Metrics on the training rows.
    pub train_metrics: Metrics,
    /// Cross-validated metrics, when the model came out of a grid search.
    pub cv_metrics: Option<MetricsSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub feature_schema_version: u32,
    pub model: ModelParams,
    pub metadata: TrainingMetadata,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    /// Phishing probability.
    pub score: f64,
}

/// Split rows into features and phishing flags, rejecting unlabeled rows.
pub fn labeled_xy(rows: &[FeatureRow]) -> Result<(Vec<FeatureVector>, Vec<bool>), MlError> {
    let mut x = Vec::with_capacity(rows.len());
    let mut y = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let label = r.label.ok_or(MlError::UnlabeledRow(i))?;
        x.push(r.features);
        y.push(label.is_phishing());
    }
    Ok((x, y))
}

pub fn fit_xy(x: &[FeatureVector], y: &[bool], cfg: &TrainConfig) -> Result<ModelParams, MlError> {
    if x.is_empty() {
        return Err(MlError::EmptyInput);
    }
    if y.iter().all(|&v| v) || y.iter().all(|&v| !v) {
        return Err(MlError::SingleClassData);
    }
    cfg.params.validate()?;
    Ok(match &cfg.params {
        Hyperparams::NaiveBayes(p) => ModelParams::NaiveBayes(NaiveBayes::fit(x, y, p)),
        Hyperparams::Logistic(p) => ModelParams::Logistic(Logistic::fit(x, y, p)),
        Hyperparams::RandomForest(p) => ModelParams::RandomForest(Forest::fit(x, y, p, cfg.seed)),
    })
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::NaiveBayes(_) => ModelKind::NaiveBayes,
            ModelParams::Logistic(_) => ModelKind::Logistic,
            ModelParams::RandomForest(_) => ModelKind::RandomForest,
        }
    }

    pub fn score(&self, x: &FeatureVector) -> f64 {
        match self {
            ModelParams::NaiveBayes(m) => m.score(x),
            ModelParams::Logistic(m) => m.score(x),
            ModelParams::RandomForest(m) => m.score(x),
        }
    }

    pub fn predict(&self, x: &FeatureVector) -> Prediction {
        let score = self.score(x);
        Prediction {
            label: if score >= 0.5 {
                Label::Phishing
            } else {
                Label::Legitimate
            },
            score,
        }
    }
}

pub fn train(rows: &[FeatureRow], cfg: &TrainConfig) -> Result<TrainedModel, MlError> {
    let (x, y) = labeled_xy(rows)?;
    let model = fit_xy(&x, &y, cfg)?;
    let predicted: Vec<bool> = x
        .iter()
        .map(|v| model.predict(v).label.is_phishing())
        .collect();
    Ok(TrainedModel {
        feature_schema_version: SCHEMA_VERSION,
        metadata: TrainingMetadata {
            seed: cfg.seed,
            config: *cfg,
            rows: rows.len(),
            train_metrics: Metrics::from_predictions(&y, &predicted),
            cv_metrics: None,
        },
        model,
    })
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    pub fn predict(&self, x: &FeatureVector) -> Prediction {
        self.model.predict(x)
    }
}

pub fn evaluate(model: &TrainedModel, rows: &[FeatureRow]) -> Result<Metrics, MlError> {
    let (x, y) = labeled_xy(rows)?;
    let predicted: Vec<bool> = x
        .iter()
        .map(|v| model.predict(v).label.is_phishing())
        .collect();
    Ok(Metrics::from_predictions(&y, &predicted))
}
