//! Stratified k-fold cross-validation and exhaustive grid search.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{Metrics, MetricsSummary};
use super::{fit_xy, labeled_xy, Hyperparams, MlError, ModelKind, TrainConfig};
use crate::dataset::FeatureRow;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified folds: each class is shuffled under `seed`, the classes are
/// laid end to end, and position `i` goes to fold `i mod k`. That keeps fold
/// sizes within one of each other and spreads each class evenly. With fewer
/// rows than `k`, there is one fold per row.
pub fn k_fold_split(phishing: &[bool], k: usize, seed: u64) -> Result<Vec<Fold>, MlError> {
    if k < 2 {
        return Err(MlError::InvalidParam {
            name: "k".into(),
            reason: "need at least 2 folds".into(),
        });
    }
    let n = phishing.len();
    if n == 0 {
        return Err(MlError::EmptyInput);
    }
    let k = k.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = Vec::with_capacity(n);
    for class in [false, true] {
        let mut members: Vec<usize> = (0..n).filter(|&i| phishing[i] == class).collect();
        members.shuffle(&mut rng);
        order.extend(members);
    }
    let mut fold_of = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % k;
    }
    Ok((0..k)
        .map(|f| {
            let (test, train) = (0..n).partition(|&i| fold_of[i] == f);
            Fold { train, test }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub folds: Vec<Metrics>,
    pub summary: MetricsSummary,
}

pub fn cross_validate(
    rows: &[FeatureRow],
    cfg: &TrainConfig,
    k: usize,
    seed: u64,
) -> Result<CvResult, MlError> {
    let (x, y) = labeled_xy(rows)?;
    let mut folds = Vec::new();
    for fold in k_fold_split(&y, k, seed)? {
        let tx: Vec<_> = fold.train.iter().map(|&i| x[i]).collect();
        let ty: Vec<_> = fold.train.iter().map(|&i| y[i]).collect();
        let model = fit_xy(&tx, &ty, cfg)?;
        let actual: Vec<bool> = fold.test.iter().map(|&i| y[i]).collect();
        let predicted: Vec<bool> = fold
            .test
            .iter()
            .map(|&i| model.predict(&x[i]).label.is_phishing())
            .collect();
        folds.push(Metrics::from_predictions(&actual, &predicted));
    }
    let summary = MetricsSummary::of(&folds);
    Ok(CvResult { folds, summary })
}

/// Parameter name → candidate values, in declaration order.
pub type Grid = Vec<(String, Vec<String>)>;

pub fn default_grid(kind: ModelKind) -> Grid {
    let g = |pairs: &[(&str, &[&str])]| -> Grid {
        pairs
            .iter()
            .map(|(k, vs)| (k.to_string(), vs.iter().map(|v| v.to_string()).collect()))
            .collect()
    };
    match kind {
        ModelKind::RandomForest => g(&[
            ("n_trees", &["50", "100", "200"]),
            ("max_depth", &["8", "16", "inf"]),
        ]),
        ModelKind::Logistic => g(&[
            ("learning_rate", &["0.05", "0.1", "0.5"]),
            ("l2", &["0", "0.001", "0.01"]),
        ]),
        ModelKind::NaiveBayes => g(&[("smoothing", &["0.5", "1.0"])]),
    }
}

/// Grid file: one `name = v1, v2, ...` per line; `#` starts a comment.
pub fn parse_grid(text: &str) -> Result<Grid, MlError> {
    let mut grid = Grid::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (name, values) = line.split_once('=').ok_or_else(|| MlError::InvalidParam {
            name: line.to_string(),
            reason: "expected `name = v1, v2`".into(),
        })?;
        let values: Vec<String> = values
            .split(',')
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .collect();
        if values.is_empty() {
            return Err(MlError::InvalidParam {
                name: name.trim().to_string(),
                reason: "no values".into(),
            });
        }
        grid.push((name.trim().to_string(), values));
    }
    Ok(grid)
}

/// Cartesian product, last parameter varying fastest.
pub fn expand_grid(grid: &Grid) -> Vec<BTreeMap<String, String>> {
    let mut points = vec![BTreeMap::new()];
    for (name, values) in grid {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.insert(name.clone(), v.clone());
                    q
                })
            })
            .collect();
    }
    points
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub config: TrainConfig,
    pub cv: CvResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: usize,
    pub table: Vec<GridRow>,
}

impl GridResult {
    pub fn best_row(&self) -> &GridRow {
        &self.table[self.best]
    }
}

/// Every grid point scored by mean CV accuracy; ties go to higher F1, then
/// to the earlier point.
pub fn grid_search(
    rows: &[FeatureRow],
    kind: ModelKind,
    grid: &Grid,
    k: usize,
    seed: u64,
) -> Result<GridResult, MlError> {
    let mut table = Vec::new();
    for point in expand_grid(grid) {
        let config = TrainConfig {
            seed,
            params: Hyperparams::from_map(kind, &point)?,
        };
        let cv = cross_validate(rows, &config, k, seed)?;
        table.push(GridRow { config, cv });
    }
    let mut best = 0;
    for (i, row) in table.iter().enumerate().skip(1) {
        let (a, b) = (&row.cv.summary, &table[best].cv.summary);
        if a.accuracy > b.accuracy || (a.accuracy == b.accuracy && a.f1 > b.f1) {
            best = i;
        }
    }
    Ok(GridResult { best, table })
}
