//! Confusion counts and the scores derived from them. Phishing is the
//! positive class.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl Confusion {
    pub fn record(&mut self, actual_phishing: bool, predicted_phishing: bool) {
        match (actual_phishing, predicted_phishing) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Unweighted mean over both classes taken as positive.
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub confusion: Confusion,
}

impl Metrics {
    pub fn from_confusion(c: Confusion) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let neg_precision = ratio(c.tn, c.tn + c.fn_);
        let neg_recall = ratio(c.tn, c.tn + c.fp);
        Self {
            accuracy: ratio(c.tp + c.tn, c.total()),
            precision,
            recall,
            f1: f1_score(precision, recall),
            macro_precision: (precision + neg_precision) / 2.0,
            macro_recall: (recall + neg_recall) / 2.0,
            macro_f1: (f1_score(precision, recall) + f1_score(neg_precision, neg_recall)) / 2.0,
            confusion: c,
        }
    }

    pub fn from_predictions(actual: &[bool], predicted: &[bool]) -> Self {
        let mut c = Confusion::default();
        for (&a, &p) in actual.iter().zip(predicted) {
            c.record(a, p);
        }
        Self::from_confusion(c)
    }
}

/// Mean and population standard deviation of per-fold metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub folds: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy_std: f64,
    pub precision_std: f64,
    pub recall_std: f64,
    pub f1_std: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    if n == 0.0 {
        return (0.0, 0.0);
    }
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl MetricsSummary {
    pub fn of(folds: &[Metrics]) -> Self {
        let (accuracy, accuracy_std) = mean_std(folds.iter().map(|m| m.accuracy));
        let (precision, precision_std) = mean_std(folds.iter().map(|m| m.precision));
        let (recall, recall_std) = mean_std(folds.iter().map(|m| m.recall));
        let (f1, f1_std) = mean_std(folds.iter().map(|m| m.f1));
        Self {
            folds: folds.len(),
            accuracy,
            precision,
            recall,
            f1,
            accuracy_std,
            precision_std,
            recall_std,
            f1_std,
            macro_precision: mean_std(folds.iter().map(|m| m.macro_precision)).0,
            macro_recall: mean_std(folds.iter().map(|m| m.macro_recall)).0,
            macro_f1: mean_std(folds.iter().map(|m| m.macro_f1)).0,
        }
    }
}
