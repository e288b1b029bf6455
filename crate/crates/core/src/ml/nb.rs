//! Categorical Naive-Bayes over the discrete feature values.

use serde::{Deserialize, Serialize};

use crate::schema::{Feature, FeatureVector, FEATURE_COUNT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NbParams {
    pub smoothing: f64,
}

impl Default for NbParams {
    fn default() -> Self {
        Self { smoothing: 1.0 }
    }
}

/// URL_Depth is bucketed into {0, 1, 2, 3+}; the rest map {-1, 0, 1} to 0..3.
pub fn category(feature: usize, value: i32) -> usize {
    if feature == Feature::UrlDepth.index() {
        value.clamp(0, 3) as usize
    } else {
        (value.clamp(-1, 1) + 1) as usize
    }
}

pub fn category_count(feature: usize) -> usize {
    if feature == Feature::UrlDepth.index() {
        4
    } else {
        3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    /// ln P(class), indexed legitimate, phishing.
    pub log_prior: [f64; 2],
    /// `log_likelihood[class][feature][category]`.
    pub log_likelihood: [Vec<Vec<f64>>; 2],
}

impl NaiveBayes {
    pub fn fit(x: &[FeatureVector], y: &[bool], p: &NbParams) -> Self {
        let n = x.len() as f64;
        let mut class_n = [0usize; 2];
        let mut counts: [Vec<Vec<f64>>; 2] = std::array::from_fn(|_| {
            (0..FEATURE_COUNT)
                .map(|f| vec![0.0; category_count(f)])
                .collect()
        });
        for (row, &label) in x.iter().zip(y) {
            let c = label as usize;
            class_n[c] += 1;
            for (f, &v) in row.0.iter().enumerate() {
                counts[c][f][category(f, v)] += 1.0;
            }
        }
        let log_likelihood = std::array::from_fn(|c| {
            counts[c]
                .iter()
                .map(|cats| {
                    let denom = class_n[c] as f64 + p.smoothing * cats.len() as f64;
                    cats.iter()
                        .map(|k| ((k + p.smoothing) / denom).ln())
                        .collect()
                })
                .collect()
        });
        Self {
            log_prior: class_n.map(|k| (k as f64 / n).ln()),
            log_likelihood,
        }
    }

    pub fn joint_log(&self, x: &FeatureVector) -> [f64; 2] {
        std::array::from_fn(|c| {
            self.log_prior[c]
                + x.0
                    .iter()
                    .enumerate()
                    .map(|(f, &v)| self.log_likelihood[c][f][category(f, v)])
                    .sum::<f64>()
        })
    }

    /// Normalized posteriors `[P(legitimate | x), P(phishing | x)]`.
    pub fn posteriors(&self, x: &FeatureVector) -> [f64; 2] {
        let j = self.joint_log(x);
        let m = j[0].max(j[1]);
        let e = j.map(|v| (v - m).exp());
        let z = e[0] + e[1];
        e.map(|v| v / z)
    }

    pub fn score(&self, x: &FeatureVector) -> f64 {
        self.posteriors(x)[1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_pair_has_even_priors() {
        let mut a = FeatureVector::default();
        let mut b = FeatureVector::default();
        a[Feature::HaveAt] = 1;
        b[Feature::UrlLength] = 1;
        let m = NaiveBayes::fit(&[a, b], &[true, false], &NbParams::default());
        assert_eq!(m.log_prior[0], m.log_prior[1]);
        assert!((m.log_prior[0].exp() - 0.5).abs() < 1e-15);
        assert!(m.score(&a) > 0.5);
        assert!(m.score(&b) < 0.5);
    }

    #[test]
    fn depth_buckets() {
        let d = Feature::UrlDepth.index();
        assert_eq!([0, 1, 2, 3, 9].map(|v| category(d, v)), [0, 1, 2, 3, 3]);
        assert_eq!([-1, 0, 1].map(|v| category(0, v)), [0, 1, 2]);
    }
}
