//! Property checks of the classifiers and evaluation code against
//! independent brute-force or closed-form oracles.

use proptest::prelude::*;

use phishlens::ml::forest::{best_split, gini};
use phishlens::ml::logistic::loss_and_gradient;
use phishlens::ml::nb::{category, category_count};
use phishlens::ml::{k_fold_split, Confusion, Metrics, NaiveBayes, NbParams};
use phishlens::schema::{FeatureVector, FEATURE_COUNT};

// ---- Gini split ----

/// Weighted child impurity of `x[f] <= t`, straight from the definition.
fn impurity_of(x: &[FeatureVector], y: &[bool], f: usize, t: f64) -> Option<f64> {
    let (mut l, mut r) = ([0u32; 2], [0u32; 2]);
    for (row, &lab) in x.iter().zip(y) {
        if f64::from(row.0[f]) <= t {
            l[lab as usize] += 1;
        } else {
            r[lab as usize] += 1;
        }
    }
    let (nl, nr) = (l[0] + l[1], r[0] + r[1]);
    if nl == 0 || nr == 0 {
        return None;
    }
    let n = f64::from(nl + nr);
    Some((f64::from(nl) * gini(l) + f64::from(nr) * gini(r)) / n)
}

/// Every threshold on the integer grid -2.5, -1.5, ..., 8.5.
fn brute_force(x: &[FeatureVector], y: &[bool], candidates: &[usize]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for &f in candidates {
        for k in -3..=8 {
            let t = f64::from(k) + 0.5;
            if let Some(imp) = impurity_of(x, y, f, t) {
                best = Some(best.map_or(imp, |b: f64| b.min(imp)));
            }
        }
    }
    best
}

fn small_node() -> impl Strategy<Value = (Vec<FeatureVector>, Vec<bool>, Vec<usize>)> {
    (1usize..=12, 1usize..=3).prop_flat_map(|(n, k)| {
        (
            prop::collection::vec(prop::collection::vec(-1i32..=6, FEATURE_COUNT), n),
            prop::collection::vec(any::<bool>(), n),
            prop::sample::subsequence((0..FEATURE_COUNT).collect::<Vec<_>>(), k),
        )
            .prop_map(|(rows, y, cands)| {
                let x = rows
                    .into_iter()
                    .map(|r| FeatureVector(r.try_into().unwrap()))
                    .collect();
                (x, y, cands)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn gini_split_matches_brute_force((x, y, cands) in small_node()) {
        let idx: Vec<usize> = (0..x.len()).collect();
        let got = best_split(&x, &y, &idx, &cands);
        let want = brute_force(&x, &y, &cands);
        match (got, want) {
            (None, None) => {}
            (Some(s), Some(w)) => {
                prop_assert!(cands.contains(&s.feature));
                prop_assert!((s.impurity - w).abs() <= 1e-12, "{} vs {}", s.impurity, w);
                let recomputed = impurity_of(&x, &y, s.feature, s.threshold).unwrap();
                prop_assert!((recomputed - s.impurity).abs() <= 1e-12);
            }
            other => prop_assert!(false, "mismatch {:?}", other),
        }
    }
}

// ---- Logistic gradient ----

fn lr_problem() -> impl Strategy<Value = (Vec<f64>, f64, Vec<[f64; FEATURE_COUNT]>, Vec<bool>, f64)>
{
    (1usize..=30).prop_flat_map(|n| {
        (
            prop::collection::vec(-1.5f64..1.5, FEATURE_COUNT),
            -2.0f64..2.0,
            prop::collection::vec(prop::collection::vec(-1i32..=4, FEATURE_COUNT), n),
            prop::collection::vec(any::<bool>(), n),
            prop::sample::select(vec![0.0, 1e-3, 0.1]),
        )
            .prop_map(|(w, b, rows, y, l2)| {
                let x = rows
                    .into_iter()
                    .map(|r| {
                        let r: [i32; FEATURE_COUNT] = r.try_into().unwrap();
                        r.map(f64::from)
                    })
                    .collect();
                (w, b, x, y, l2)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// Relative error of the whole gradient (weights and bias) against a
    /// five-point central stencil, `‖g − ĝ‖ / max(‖g‖, ‖ĝ‖)`.
    #[test]
    fn lr_gradient_matches_central_differences((w, b, x, y, l2) in lr_problem()) {
        let h = 1e-4;
        let loss = |w: &[f64], b: f64| loss_and_gradient(w, b, &x, &y, l2).0;
        let stencil = |at: &dyn Fn(f64) -> f64| (at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h)) / (12.0 * h);
        let (_, mut analytic, gb) = loss_and_gradient(&w, b, &x, &y, l2);
        analytic.push(gb);
        let mut numeric: Vec<f64> = (0..FEATURE_COUNT)
            .map(|j| {
                stencil(&|d| {
                    let mut v = w.clone();
                    v[j] += d;
                    loss(&v, b)
                })
            })
            .collect();
        numeric.push(stencil(&|d| loss(&w, b + d)));

        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, n)| a - n).collect();
        let scale = norm(&analytic).max(norm(&numeric));
        prop_assume!(scale > 1e-9, "gradient vanishes");
        let rel = norm(&diff) / scale;
        prop_assert!(rel < 1e-5, "relative error {:e}\nanalytic {:?}\nnumeric {:?}", rel, analytic, numeric);
    }
}

// ---- Naive Bayes ----

fn nb_problem() -> impl Strategy<Value = (Vec<FeatureVector>, Vec<bool>, Vec<FeatureVector>, f64)> {
    (2usize..=80).prop_flat_map(|n| {
        let row = || {
            prop::collection::vec(-1i32..=5, FEATURE_COUNT)
                .prop_map(|r| FeatureVector(r.try_into().unwrap()))
        };
        (
            prop::collection::vec(row(), n),
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(row(), 1..10),
            prop::sample::select(vec![0.1, 0.5, 1.0, 2.0]),
        )
            .prop_filter("both classes", |(_, y, _, _)| {
                y.iter().any(|&b| b) && y.iter().any(|&b| !b)
            })
    })
}

/// P(phishing | q) from raw counts, in log space.
fn nb_oracle(x: &[FeatureVector], y: &[bool], q: &FeatureVector, alpha: f64) -> f64 {
    let mut logp = [0.0f64; 2];
    for (c, lp) in logp.iter_mut().enumerate() {
        let members: Vec<&FeatureVector> = x
            .iter()
            .zip(y)
            .filter(|(_, &l)| l as usize == c)
            .map(|(r, _)| r)
            .collect();
        let nc = members.len() as f64;
        *lp = (nc / x.len() as f64).ln();
        for f in 0..FEATURE_COUNT {
            let k = members
                .iter()
                .filter(|r| category(f, r.0[f]) == category(f, q.0[f]))
                .count() as f64;
            *lp += ((k + alpha) / (nc + alpha * category_count(f) as f64)).ln();
        }
    }
    1.0 / (1.0 + (logp[0] - logp[1]).exp())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn nb_posteriors_normalized((x, y, queries, alpha) in nb_problem()) {
        let m = NaiveBayes::fit(&x, &y, &NbParams { smoothing: alpha });
        for q in &queries {
            let p = m.posteriors(q);
            prop_assert!(((p[0] + p[1]) - 1.0).abs() <= 1e-9);
            prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert!((p[1] - nb_oracle(&x, &y, q, alpha)).abs() <= 1e-9);
        }
    }
}

// ---- Metrics ----

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn metric_identities(tp in 0u64..500, fp in 0u64..500, tn in 0u64..500, fn_ in 0u64..500, k in 1u64..50) {
        let c = Confusion { tp, fp, tn, fn_ };
        let m = Metrics::from_confusion(c);
        prop_assert_eq!(c.total(), tp + fp + tn + fn_);
        prop_assert_eq!(m.accuracy, ratio(tp + tn, c.total()));
        prop_assert_eq!(m.precision, ratio(tp, tp + fp));
        prop_assert_eq!(m.recall, ratio(tp, tp + fn_));
        let (p, r) = (m.precision, m.recall);
        if p + r > 0.0 {
            prop_assert_eq!(m.f1, 2.0 * p * r / (p + r));
        } else {
            prop_assert_eq!(m.f1, 0.0);
        }
        // Same value as the count form up to rounding.
        prop_assert!((m.f1 - ratio(2 * tp, 2 * tp + fp + fn_)).abs() <= 4.0 * f64::EPSILON);
        // Recomputing from the stored counts reproduces everything.
        prop_assert_eq!(Metrics::from_confusion(m.confusion), m);
        prop_assert_eq!(m.macro_precision, (ratio(tp, tp + fp) + ratio(tn, tn + fn_)) / 2.0);
        prop_assert_eq!(m.macro_recall, (ratio(tp, tp + fn_) + ratio(tn, tn + fp)) / 2.0);
        let (np, nr) = (ratio(tn, tn + fn_), ratio(tn, tn + fp));
        let neg_f1 = if np + nr > 0.0 { 2.0 * np * nr / (np + nr) } else { 0.0 };
        prop_assert_eq!(m.macro_f1, (m.f1 + neg_f1) / 2.0);

        // Swapping which class is positive keeps the symmetric scores.
        let s = Metrics::from_confusion(Confusion { tp: tn, fp: fn_, tn: tp, fn_: fp });
        prop_assert_eq!(s.accuracy, m.accuracy);
        prop_assert_eq!(s.macro_precision, m.macro_precision);
        prop_assert_eq!(s.macro_recall, m.macro_recall);
        prop_assert_eq!(s.macro_f1, m.macro_f1);

        // Scaling every count leaves every score unchanged.
        let scaled = Metrics::from_confusion(Confusion { tp: k * tp, fp: k * fp, tn: k * tn, fn_: k * fn_ });
        prop_assert_eq!(
            (scaled.accuracy, scaled.precision, scaled.recall, scaled.f1, scaled.macro_f1),
            (m.accuracy, m.precision, m.recall, m.f1, m.macro_f1)
        );

        // Rebuilding the tuple from label vectors gives the same confusion.
        let mut actual = Vec::new();
        let mut predicted = Vec::new();
        for (a, p, n) in [(true, true, tp), (false, true, fp), (false, false, tn), (true, false, fn_)] {
            actual.extend(std::iter::repeat_n(a, n as usize));
            predicted.extend(std::iter::repeat_n(p, n as usize));
        }
        prop_assert_eq!(Metrics::from_predictions(&actual, &predicted), m);
    }
}

// ---- k-fold ----

#[test]
fn k_fold_partitions_every_size() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for n in 1..=200usize {
        for k in [2usize, 3, 5, 10, 13] {
            let y: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
            let seed = rng.random();
            let folds = k_fold_split(&y, k, seed).unwrap();
            assert_eq!(
                folds,
                k_fold_split(&y, k, seed).unwrap(),
                "n={n} k={k} not deterministic"
            );
            assert_eq!(folds.len(), k.min(n), "n={n} k={k}");

            let mut seen = vec![0u32; n];
            for f in &folds {
                for &i in &f.test {
                    seen[i] += 1;
                }
                let mut both: Vec<usize> = f.train.iter().chain(&f.test).copied().collect();
                both.sort_unstable();
                assert_eq!(
                    both,
                    (0..n).collect::<Vec<_>>(),
                    "n={n} k={k}: train+test is not a partition"
                );
            }
            assert!(
                seen.iter().all(|&c| c == 1),
                "n={n} k={k}: some row tested {seen:?}"
            );

            let sizes: Vec<usize> = folds.iter().map(|f| f.test.len()).collect();
            assert!(
                sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1,
                "n={n} k={k} {sizes:?}"
            );
            for class in [false, true] {
                let per: Vec<usize> = folds
                    .iter()
                    .map(|f| f.test.iter().filter(|&&i| y[i] == class).count())
                    .collect();
                assert!(
                    per.iter().max().unwrap() - per.iter().min().unwrap() <= 1,
                    "n={n} k={k} class={class} {per:?}"
                );
            }
        }
    }
}
