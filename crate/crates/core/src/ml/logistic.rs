//! L2-regularized logistic regression fitted by full-batch gradient descent.

use serde::{Deserialize, Serialize};

use crate::schema::{FeatureVector, FEATURE_COUNT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrParams {
    pub learning_rate: f64,
    pub l2: f64,
    pub epochs: usize,
}

impl Default for LrParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            l2: 1e-3,
            epochs: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Logistic {
    pub weights: Vec<f64>,
    pub bias: f64,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn dot(w: &[f64], x: &[f64; FEATURE_COUNT]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Objective: mean log-loss + (l2 / 2)·‖w‖², bias unregularized.
/// Returns `(loss, ∂loss/∂w, ∂loss/∂b)`.
pub fn loss_and_gradient(
    w: &[f64],
    b: f64,
    x: &[[f64; FEATURE_COUNT]],
    y: &[bool],
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for (xi, &yi) in x.iter().zip(y) {
        let z = dot(w, xi) + b;
        let t = if yi { 1.0 } else { 0.0 };
        // -ln σ(z) = softplus(-z) and -ln(1-σ(z)) = softplus(z); the
        // equivalent softplus(z) - z would cancel badly for large z.
        loss += if yi { softplus(-z) } else { softplus(z) };
        let r = sigmoid(z) - t;
        for (g, v) in gw.iter_mut().zip(xi) {
            *g += r * v;
        }
        gb += r;
    }
    loss /= n;
    gb /= n;
    for (g, wj) in gw.iter_mut().zip(w) {
        *g = *g / n + l2 * wj;
    }
    loss += 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
    (loss, gw, gb)
}

impl Logistic {
    pub fn zero() -> Self {
        Self {
            weights: vec![0.0; FEATURE_COUNT],
            bias: 0.0,
        }
    }

    pub fn fit(x: &[FeatureVector], y: &[bool], p: &LrParams) -> Self {
        let xs: Vec<[f64; FEATURE_COUNT]> = x.iter().map(FeatureVector::as_f64).collect();
        let mut m = Self::zero();
        for _ in 0..p.epochs {
            let (_, gw, gb) = loss_and_gradient(&m.weights, m.bias, &xs, y, p.l2);
            for (w, g) in m.weights.iter_mut().zip(&gw) {
                *w -= p.learning_rate * g;
            }
            m.bias -= p.learning_rate * gb;
        }
        m
    }

    pub fn score(&self, x: &FeatureVector) -> f64 {
        sigmoid(dot(&self.weights, &x.as_f64()) + self.bias)
    }
}
