//! Random forest of Gini CART trees grown on bootstrap samples.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::schema::{FeatureVector, FEATURE_COUNT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfParams {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub features_per_split: usize,
}

impl Default for RfParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            features_per_split: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class_counts: [u32; 2],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// Root at index 0.
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_for(&self, x: &FeatureVector) -> [u32; 2] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if f64::from(x.0[*feature]) <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
                Node::Leaf { class_counts } => return *class_counts,
            }
        }
    }

    /// Majority vote of the leaf; a tie votes phishing.
    pub fn votes_phishing(&self, x: &FeatureVector) -> bool {
        let c = self.leaf_for(x);
        c[1] >= c[0]
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }
}

pub fn gini(counts: [u32; 2]) -> f64 {
    let n = f64::from(counts[0] + counts[1]);
    if n == 0.0 {
        return 0.0;
    }
    let p0 = f64::from(counts[0]) / n;
    let p1 = f64::from(counts[1]) / n;
    1.0 - p0 * p0 - p1 * p1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// Size-weighted mean Gini impurity of the two children.
    pub impurity: f64,
}

fn count(idx: &[usize], y: &[bool]) -> [u32; 2] {
    let mut c = [0u32; 2];
    for &i in idx {
        c[y[i] as usize] += 1;
    }
    c
}

/// Best `x[f] <= t` split of the rows `idx` over the `candidates`, scanning
/// midpoints between consecutive distinct values. Ties keep the earlier
/// candidate and the lower threshold. `None` when no candidate varies.
pub fn best_split(
    x: &[FeatureVector],
    y: &[bool],
    idx: &[usize],
    candidates: &[usize],
) -> Option<Split> {
    if idx.len() < 2 {
        return None;
    }
    let total = count(idx, y);
    let n = f64::from(total[0] + total[1]);
    let mut best: Option<Split> = None;
    let mut vals: Vec<(i32, bool)> = Vec::with_capacity(idx.len());
    for &f in candidates {
        vals.clear();
        vals.extend(idx.iter().map(|&i| (x[i].0[f], y[i])));
        vals.sort_unstable_by_key(|&(v, _)| v);
        let mut left = [0u32; 2];
        for k in 0..vals.len() - 1 {
            left[vals[k].1 as usize] += 1;
            if vals[k].0 == vals[k + 1].0 {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let nl = f64::from(left[0] + left[1]);
            let impurity = (nl * gini(left) + (n - nl) * gini(right)) / n;
            if best.is_none_or(|b| impurity < b.impurity) {
                best = Some(Split {
                    feature: f,
                    threshold: (f64::from(vals[k].0) + f64::from(vals[k + 1].0)) / 2.0,
                    impurity,
                });
            }
        }
    }
    best
}

struct Grower<'a> {
    x: &'a [FeatureVector],
    y: &'a [bool],
    p: &'a RfParams,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn grow(&mut self, idx: &[usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let counts = count(idx, self.y);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            class_counts: counts,
        });
        let pure = counts[0] == 0 || counts[1] == 0;
        if pure
            || idx.len() < self.p.min_samples_split
            || self.p.max_depth.is_some_and(|d| depth >= d)
        {
            return id;
        }
        let k = self.p.features_per_split.clamp(1, FEATURE_COUNT);
        let mut candidates = sample(rng, FEATURE_COUNT, k).into_vec();
        candidates.sort_unstable();
        let Some(split) = best_split(self.x, self.y, idx, &candidates) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| f64::from(self.x[i].0[split.feature]) <= split.threshold);
        let left = self.grow(&l, depth + 1, rng);
        let right = self.grow(&r, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

pub fn grow_tree(
    x: &[FeatureVector],
    y: &[bool],
    idx: &[usize],
    p: &RfParams,
    rng: &mut ChaCha8Rng,
) -> Tree {
    let mut g = Grower {
        x,
        y,
        p,
        nodes: Vec::new(),
    };
    g.grow(idx, 0, rng);
    Tree { nodes: g.nodes }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Tree `t` draws from its own ChaCha stream `t` under `seed`, so the result
    /// does not depend on thread scheduling.
    pub fn fit(x: &[FeatureVector], y: &[bool], p: &RfParams, seed: u64) -> Self {
        let n = x.len();
        let trees = (0..p.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t as u64);
                let boot: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                grow_tree(x, y, &boot, p, &mut rng)
            })
            .collect();
        Self { trees }
    }

    /// Fraction of trees voting phishing.
    pub fn score(&self, x: &FeatureVector) -> f64 {
        let votes = self.trees.iter().filter(|t| t.votes_phishing(x)).count();
        votes as f64 / self.trees.len() as f64
    }
}
