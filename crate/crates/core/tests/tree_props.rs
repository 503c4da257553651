use causal_triage::data::{ColumnSchema, Dataset};
use causal_triage::tree::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome code 0 is the positive class.
fn dataset(features: Vec<(ColumnSchema, Vec<f64>)>, positive: &[bool]) -> Dataset {
    let mut schema: Vec<ColumnSchema> = features.iter().map(|(s, _)| s.clone()).collect();
    let mut cols: Vec<Vec<Option<f64>>> = features.into_iter().map(|(_, v)| v.into_iter().map(Some).collect()).collect();
    schema.push(ColumnSchema::categorical("y", "outcome", 2));
    cols.push(positive.iter().map(|&p| Some(if p { 0.0 } else { 1.0 })).collect());
    Dataset::new(schema, cols).unwrap()
}

fn random_dataset(seed: u64, n: usize, p: usize) -> (Dataset, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut feats = Vec::new();
    for j in 0..p {
        let name = format!("f{j}");
        match j % 3 {
            0 => feats.push((ColumnSchema::continuous(&name, "x"), (0..n).map(|_| (rng.random::<f64>() * 20.0).round() / 4.0).collect())),
            1 => feats.push((ColumnSchema::binary(&name, "x"), (0..n).map(|_| rng.random_range(0..2) as f64).collect())),
            _ => feats.push((ColumnSchema::categorical(&name, "x", 3), (0..n).map(|_| rng.random_range(0..3) as f64).collect())),
        }
    }
    let labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.35)).collect();
    (dataset(feats, &labels), (0..p).map(|j| format!("f{j}")).collect())
}

fn check_partition(node: &TreeNode) -> bool {
    match node {
        TreeNode::Leaf { .. } => true,
        TreeNode::Split { counts, left, right, .. } => {
            let (l, r) = (left.counts(), right.counts());
            l.positive + r.positive == counts.positive
                && l.negative + r.negative == counts.negative
                && l.total() > 0
                && r.total() > 0
                && check_partition(left)
                && check_partition(right)
        }
    }
}

/// Independent traversal: rebuilds each decision from the rule fields.
fn walk(node: &TreeNode, row: &[f64]) -> bool {
    match node {
        TreeNode::Leaf { predicted_positive, .. } => *predicted_positive,
        TreeNode::Split { index, rule, left, right, .. } => {
            let left_branch = match rule {
                SplitRule::Threshold { threshold } => row[*index] <= *threshold,
                SplitRule::Level { level, .. } => row[*index] == *level as f64,
            };
            walk(if left_branch { left } else { right }, row)
        }
    }
}

fn train_accuracy(d: &Dataset, features: &[String], depth: usize) -> f64 {
    let cfg = TreeConfig { max_depth: depth, ..Default::default() };
    let t = fit_tree(&d.view_all(), features, "y", &cfg).unwrap();
    evaluate(&t, &d.view_all()).unwrap().accuracy
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn fitted_trees_respect_depth_and_partition(seed in 0u64..100_000, n in 2usize..60, p in 1usize..6, depth in 1usize..6) {
        let (d, features) = random_dataset(seed, n, p);
        let cfg = TreeConfig { max_depth: depth, ..Default::default() };
        let t = fit_tree(&d.view_all(), &features, "y", &cfg).unwrap();
        prop_assert!(t.depth() <= depth);
        prop_assert!(check_partition(&t.root));
        prop_assert_eq!(t.root.counts().total(), n);
    }

    #[test]
    fn accuracy_is_monotone_in_depth(seed in 0u64..100_000, n in 5usize..80, p in 1usize..5) {
        let (d, features) = random_dataset(seed, n, p);
        let accs: Vec<f64> = (1..=5).map(|k| train_accuracy(&d, &features, k)).collect();
        prop_assert!(accs.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{:?}", accs);
    }

    #[test]
    fn prediction_matches_hand_walk(seed in 0u64..100_000, n in 5usize..60, p in 1usize..6) {
        let (d, features) = random_dataset(seed, n, p);
        let t = fit_tree(&d.view_all(), &features, "y", &TreeConfig::default()).unwrap();
        for r in 0..n {
            let row: Vec<f64> = (0..p).map(|j| d.value(r, j).unwrap()).collect();
            let opt: Vec<Option<f64>> = row.iter().copied().map(Some).collect();
            prop_assert_eq!(t.predict(&opt).unwrap(), walk(&t.root, &row));
        }
    }

    #[test]
    fn metric_identities(tp in 0usize..100, fp in 0usize..100, tn in 0usize..100, fn_ in 0usize..100) {
        prop_assume!(tp + fp + tn + fn_ > 0);
        let m = Metrics::from_counts(tp, fp, tn, fn_);
        let n = (tp + fp + tn + fn_) as f64;
        prop_assert!((m.accuracy - (tp + tn) as f64 / n).abs() < 1e-15);
        if 2 * tp + fp + fn_ > 0 {
            prop_assert!((m.f1 - 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64).abs() < 1e-15);
        }
        if tp + fn_ > 0 {
            prop_assert!((m.sensitivity - tp as f64 / (tp + fn_) as f64).abs() < 1e-15);
        }
        if tn + fp > 0 {
            prop_assert!((m.specificity - tn as f64 / (tn + fp) as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn folds_are_stratified_and_balanced(n_pos in 0usize..60, n_neg in 0usize..60, k in 2usize..11, seed in 0u64..1000) {
        let labels: Vec<bool> = (0..n_pos).map(|_| true).chain((0..n_neg).map(|_| false)).collect();
        prop_assume!(labels.len() >= k);
        let folds = stratified_folds(&labels, k, seed).unwrap();
        prop_assert_eq!(&folds, &stratified_folds(&labels, k, seed).unwrap());
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for class in [true, false] {
            let per: Vec<usize> = folds.iter().map(|f| f.iter().filter(|&&i| labels[i] == class).count()).collect();
            prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
        }
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
    }
}

fn xor() -> Dataset {
    let a = vec![0.0, 0.0, 1.0, 1.0];
    let b = vec![0.0, 1.0, 0.0, 1.0];
    dataset(vec![(ColumnSchema::binary("a", "x"), a), (ColumnSchema::binary("b", "x"), b)], &[false, true, true, false])
}

#[test]
fn xor_needs_two_levels() {
    let d = xor();
    let features = vec!["a".to_string(), "b".to_string()];
    assert_eq!(train_accuracy(&d, &features, 2), 1.0);
    // best stump over every feature, split and leaf labelling
    let labels = [false, true, true, false];
    let mut best = 0.0f64;
    for j in 0..2 {
        for left_label in [false, true] {
            for right_label in [false, true] {
                let correct = (0..4)
                    .filter(|&r| {
                        let v = d.value(r, j).unwrap();
                        (if v == 0.0 { left_label } else { right_label }) == labels[r]
                    })
                    .count();
                best = best.max(correct as f64 / 4.0);
            }
        }
    }
    assert_eq!(best, 0.5);
    assert_eq!(train_accuracy(&d, &features, 1), best);
}

#[test]
fn all_negative_predictor_on_cohort_counts() {
    let m = Metrics::from_counts(0, 0, 194, 71);
    assert_eq!((m.sensitivity, m.specificity), (0.0, 1.0));
    assert!((m.accuracy - 194.0 / 265.0).abs() < 1e-15);
    assert_eq!(format!("{:.3}", m.accuracy), "0.732");
}

#[test]
fn separable_data_cross_validates_perfectly() {
    // classes separated by a wide gap
    let x: Vec<f64> = (0..40).map(|i| if i < 25 { i as f64 } else { 100.0 + i as f64 }).collect();
    let labels: Vec<bool> = (0..40).map(|i| i >= 25).collect();
    let d = dataset(vec![(ColumnSchema::continuous("x", "c"), x)], &labels);
    let cv = kfold_cv(&d.view_all(), &["x"], "y", 5, &TreeConfig::default(), 3).unwrap();
    assert_eq!(cv.mean.accuracy, 1.0);
    assert_eq!(cv, kfold_cv(&d.view_all(), &["x"], "y", 5, &TreeConfig::default(), 3).unwrap());
}

#[test]
fn noise_labels_cross_validate_near_chance() {
    let accs: Vec<f64> = (0..50)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let feats = (0..3).map(|j| (ColumnSchema::continuous(&format!("f{j}"), "x"), (0..200).map(|_| rng.random::<f64>()).collect())).collect();
            let mut labels: Vec<bool> = (0..200).map(|i| i < 100).collect();
            labels.shuffle(&mut rng);
            let d = dataset(feats, &labels);
            kfold_cv(&d.view_all(), &["f0", "f1", "f2"], "y", 10, &TreeConfig::default(), seed).unwrap().mean.accuracy
        })
        .collect();
    let mean = accs.iter().sum::<f64>() / 50.0;
    let sd = (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / 49.0).sqrt();
    assert!((mean - 0.5).abs() <= 0.1, "mean {mean}");
    assert!(sd <= 0.1, "sd {sd}");
}

#[test]
fn degenerate_pool_reproduces_reference_cv() {
    let (d, features) = random_dataset(8, 120, 3);
    let cfg = PermutationConfig { n_trials: 1, ..Default::default() };
    let report = permutation_baseline(&d, &features, 3, "y", 120, &cfg, 21).unwrap();
    let cv = kfold_cv(&d.view_all(), &features, "y", 10, &cfg.tree, 21).unwrap();
    assert_eq!(report.trials.len(), 1);
    assert_eq!(report.trials[0].cv, cv.mean);
    assert_eq!(report.mean, cv.mean);
}
