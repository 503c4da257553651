//! Depth-limited CART classifier, metrics, stratified cross-validation and the
//! random-feature baseline.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, Dataset, DatasetView, Kind};

#[derive(Error, Debug)]
pub enum TreeError {
    #[error("no rows to fit")]
    EmptyData,
    #[error("max_depth must be at least 1")]
    InvalidDepth,
    #[error("feature `{0}` is missing for this row")]
    MissingFeature(String),
    #[error("outcome `{0}` must be a two-level categorical column")]
    BadOutcome(String),
    #[error("{n} rows cannot fill {k} folds")]
    TooFewRows { n: usize, k: usize },
    #[error("trial {trial}: no feature draw within tolerance of {target_n} complete cases after {retries} tries")]
    ExhaustedDraws { trial: usize, target_n: usize, retries: usize },
    #[error("feature pool has {pool} columns, {wanted} requested")]
    PoolTooSmall { pool: usize, wanted: usize },
    #[error("view has missing values among the tree columns")]
    IncompleteView,
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// Number of split levels on the longest path; the root split is level 1.
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Prediction for a leaf with equal class counts.
    pub tie_predicts_positive: bool,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self { max_depth: 4, min_samples_leaf: 1, tie_predicts_positive: true }
    }
}

/// Subjects per class; positive is the adverse outcome (death).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub positive: usize,
    pub negative: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.positive + self.negative
    }

    fn gini_mass(&self) -> f64 {
        let n = self.total() as f64;
        if n == 0.0 {
            return 0.0;
        }
        let (p, q) = (self.positive as f64, self.negative as f64);
        n - (p * p + q * q) / n
    }

    fn is_pure(&self) -> bool {
        self.positive == 0 || self.negative == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SplitRule {
    /// `value <= threshold` goes left.
    Threshold { threshold: f64 },
    /// `code == level` goes left.
    Level { level: usize, label: String },
}

impl SplitRule {
    fn goes_left(&self, value: f64) -> bool {
        match self {
            SplitRule::Threshold { threshold } => value <= *threshold,
            SplitRule::Level { level, .. } => value as usize == *level,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum TreeNode {
    Split {
        feature: String,
        /// Position in [`Tree::features`].
        index: usize,
        rule: SplitRule,
        counts: ClassCounts,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        counts: ClassCounts,
        predicted_positive: bool,
    },
}

impl TreeNode {
    pub fn counts(&self) -> ClassCounts {
        match self {
            TreeNode::Split { counts, .. } | TreeNode::Leaf { counts, .. } => *counts,
        }
    }

    /// Split levels below and including this node.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub features: Vec<String>,
    pub outcome: String,
    pub positive_label: String,
    pub negative_label: String,
    pub root: TreeNode,
}

struct Columns {
    x: Vec<Vec<f64>>,
    binary: Vec<bool>,
    labels: Vec<bool>,
    level_names: Vec<Vec<String>>,
}

fn extract<S: AsRef<str>>(v: &DatasetView<'_>, features: &[S], outcome: &str) -> Result<(Columns, [String; 2]), TreeError> {
    let o = v.position(outcome)?;
    let schema = v.schema(o);
    if !schema.kind.is_categorical() || schema.levels.len() != 2 {
        return Err(TreeError::BadOutcome(outcome.to_string()));
    }
    let pos_code = v.source().positive_code(v.columns()[o]);
    let labels = v
        .numeric_column(o)
        .map_err(|_| TreeError::IncompleteView)?
        .into_iter()
        .map(|c| c as usize == pos_code)
        .collect();
    let mut x = Vec::with_capacity(features.len());
    let mut binary = Vec::new();
    let mut level_names = Vec::new();
    for f in features {
        let j = v.position(f.as_ref())?;
        x.push(v.numeric_column(j).map_err(|_| TreeError::IncompleteView)?);
        binary.push(v.schema(j).kind == Kind::Binary);
        level_names.push(v.schema(j).levels.clone());
    }
    let names = [schema.levels[pos_code].clone(), schema.levels[1 - pos_code].clone()];
    Ok((Columns { x, binary, labels, level_names }, names))
}

fn count(labels: &[bool], idx: &[usize]) -> ClassCounts {
    let positive = idx.iter().filter(|&&i| labels[i]).count();
    ClassCounts { positive, negative: idx.len() - positive }
}

struct Candidate {
    feature: usize,
    rule: SplitRule,
    impurity: f64,
}

fn best_split(cols: &Columns, idx: &[usize], cfg: &TreeConfig) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    let total = count(&cols.labels, idx);
    for (f, xs) in cols.x.iter().enumerate() {
        let mut order: Vec<usize> = idx.to_vec();
        order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
        let mut left = ClassCounts::default();
        for w in 0..order.len().saturating_sub(1) {
            let i = order[w];
            if cols.labels[i] {
                left.positive += 1;
            } else {
                left.negative += 1;
            }
            let (here, next) = (xs[i], xs[order[w + 1]]);
            if here == next {
                continue;
            }
            let right = ClassCounts { positive: total.positive - left.positive, negative: total.negative - left.negative };
            if left.total() < cfg.min_samples_leaf || right.total() < cfg.min_samples_leaf {
                continue;
            }
            let impurity = (left.gini_mass() + right.gini_mass()) / total.total() as f64;
            if best.as_ref().is_none_or(|b| impurity < b.impurity - 1e-12) {
                let rule = if cols.binary[f] {
                    let level = here as usize;
                    SplitRule::Level { level, label: cols.level_names[f][level].clone() }
                } else {
                    SplitRule::Threshold { threshold: 0.5 * (here + next) }
                };
                best = Some(Candidate { feature: f, rule, impurity });
            }
        }
    }
    best
}

fn grow(cols: &Columns, names: &[String], idx: &[usize], depth_left: usize, cfg: &TreeConfig) -> TreeNode {
    let counts = count(&cols.labels, idx);
    let leaf = || TreeNode::Leaf {
        counts,
        predicted_positive: counts.positive > counts.negative
            || (counts.positive == counts.negative && cfg.tie_predicts_positive),
    };
    if depth_left == 0 || counts.is_pure() || idx.len() < 2 * cfg.min_samples_leaf.max(1) {
        return leaf();
    }
    let Some(c) = best_split(cols, idx, cfg) else { return leaf() };
    let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| c.rule.goes_left(cols.x[c.feature][i]));
    TreeNode::Split {
        feature: names[c.feature].clone(),
        index: c.feature,
        rule: c.rule,
        counts,
        left: Box::new(grow(cols, names, &l, depth_left - 1, cfg)),
        right: Box::new(grow(cols, names, &r, depth_left - 1, cfg)),
    }
}

/// Greedy weighted-Gini partitioning. Ties go to the earliest feature, then the smallest threshold.
pub fn fit_tree<S: AsRef<str>>(
    v: &DatasetView<'_>,
    features: &[S],
    outcome: &str,
    cfg: &TreeConfig,
) -> Result<Tree, TreeError> {
    if cfg.max_depth == 0 {
        return Err(TreeError::InvalidDepth);
    }
    if v.n_rows() == 0 {
        return Err(TreeError::EmptyData);
    }
    let (cols, [pos, neg]) = extract(v, features, outcome)?;
    let names: Vec<String> = features.iter().map(|f| f.as_ref().to_string()).collect();
    let idx: Vec<usize> = (0..v.n_rows()).collect();
    let root = grow(&cols, &names, &idx, cfg.max_depth, cfg);
    Ok(Tree { features: names, outcome: outcome.to_string(), positive_label: pos, negative_label: neg, root })
}

impl Tree {
    /// Predicts from feature values given in [`Tree::features`] order.
    pub fn predict(&self, row: &[Option<f64>]) -> Result<bool, TreeError> {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { predicted_positive, .. } => return Ok(*predicted_positive),
                TreeNode::Split { feature, index, rule, left, right, .. } => {
                    let value = row.get(*index).copied().flatten().ok_or_else(|| TreeError::MissingFeature(feature.clone()))?;
                    node = if rule.goes_left(value) { left } else { right };
                }
            }
        }
    }

    /// Predictions for every row of a view containing the tree's features.
    pub fn predict_view(&self, v: &DatasetView<'_>) -> Result<Vec<bool>, TreeError> {
        let pos: Vec<usize> = self.features.iter().map(|f| v.position(f)).collect::<Result<_, _>>()?;
        (0..v.n_rows())
            .map(|r| {
                let row: Vec<Option<f64>> = pos.iter().map(|&j| v.value(r, j)).collect();
                self.predict(&row)
            })
            .collect()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }

    /// GraphViz rendering: each box shows subject count, question, then positive/negative counts;
    /// fill is red when positives dominate, green when negatives do, grey on ties.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph tree {\n  node [shape=box, style=\"rounded,filled\"];\n");
        let mut next = 0usize;
        self.dot_node(&self.root, &mut next, &mut out);
        out.push_str("}\n");
        out
    }

    fn dot_node(&self, node: &TreeNode, next: &mut usize, out: &mut String) -> usize {
        let id = *next;
        *next += 1;
        let c = node.counts();
        let fill = match c.positive.cmp(&c.negative) {
            std::cmp::Ordering::Greater => "#f4a6a6",
            std::cmp::Ordering::Less => "#a6e3a6",
            std::cmp::Ordering::Equal => "#d0d0d0",
        };
        let question = match node {
            TreeNode::Split { feature, rule: SplitRule::Threshold { threshold }, .. } => format!("{feature} <= {threshold:.3}?\\n"),
            TreeNode::Split { feature, rule: SplitRule::Level { label, .. }, .. } => format!("{feature} = {label}?\\n"),
            TreeNode::Leaf { .. } => String::new(),
        };
        let _ = writeln!(
            out,
            "  n{id} [label=\"{}\\n{question}{}/{}\", fillcolor=\"{fill}\"];",
            c.total(),
            c.positive,
            c.negative
        );
        if let TreeNode::Split { left, right, .. } = node {
            let l = self.dot_node(left, next, out);
            let _ = writeln!(out, "  n{id} -> n{l} [label=\"yes\"];");
            let r = self.dot_node(right, next, out);
            let _ = writeln!(out, "  n{id} -> n{r} [label=\"no\"];");
        }
        id
    }
}

/// Confusion counts with the positive class as the adverse outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub sensitivity: f64,
    pub specificity: f64,
    pub f1: f64,
    pub accuracy: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metrics {
    /// Ratios with a zero denominator are reported as 0.
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        Self {
            tp,
            fp,
            tn,
            fn_,
            sensitivity: ratio(tp, tp + fn_),
            specificity: ratio(tn, tn + fp),
            f1: ratio(2 * tp, 2 * tp + fp + fn_),
            accuracy: ratio(tp + tn, tp + tn + fp + fn_),
        }
    }

    pub fn from_predictions(predicted: &[bool], actual: &[bool]) -> Self {
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        for (&p, &a) in predicted.iter().zip(actual) {
            match (p, a) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fn_ += 1,
            }
        }
        Self::from_counts(tp, fp, tn, fn_)
    }

    pub fn n(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn summary(&self) -> MetricSummary {
        MetricSummary { sensitivity: self.sensitivity, specificity: self.specificity, f1: self.f1, accuracy: self.accuracy }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub sensitivity: f64,
    pub specificity: f64,
    pub f1: f64,
    pub accuracy: f64,
}

impl MetricSummary {
    pub fn mean(items: &[MetricSummary]) -> MetricSummary {
        let n = items.len().max(1) as f64;
        let sum = |f: fn(&MetricSummary) -> f64| items.iter().map(f).sum::<f64>() / n;
        MetricSummary {
            sensitivity: sum(|m| m.sensitivity),
            specificity: sum(|m| m.specificity),
            f1: sum(|m| m.f1),
            accuracy: sum(|m| m.accuracy),
        }
    }

    pub fn misclassified_pct(&self) -> f64 {
        100.0 * (1.0 - self.accuracy)
    }
}

/// Metrics of `t` on every row of `v`.
pub fn evaluate(t: &Tree, v: &DatasetView<'_>) -> Result<Metrics, TreeError> {
    let predicted = t.predict_view(v)?;
    let o = v.position(&t.outcome)?;
    let pos_code = v.source().positive_code(v.columns()[o]);
    let actual: Vec<bool> = v
        .numeric_column(o)
        .map_err(|_| TreeError::IncompleteView)?
        .into_iter()
        .map(|c| c as usize == pos_code)
        .collect();
    Ok(Metrics::from_predictions(&predicted, &actual))
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin, the
/// negative class continuing the rotation where the positive class stopped.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, TreeError> {
    if k < 2 || labels.len() < k {
        return Err(TreeError::TooFewRows { n: labels.len(), k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut folds = vec![Vec::new(); k];
    for (slot, i) in pos.into_iter().chain(neg).enumerate() {
        folds[slot % k].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<Metrics>,
    pub mean: MetricSummary,
}

/// k-fold cross-validation on a complete view.
pub fn kfold_cv<S: AsRef<str> + Sync>(
    v: &DatasetView<'_>,
    features: &[S],
    outcome: &str,
    k: usize,
    cfg: &TreeConfig,
    seed: u64,
) -> Result<CvReport, TreeError> {
    let (cols, _) = extract(v, features, outcome)?;
    let folds = stratified_folds(&cols.labels, k, seed)?;
    let metrics: Vec<Metrics> = folds
        .par_iter()
        .map(|held| {
            let mut in_fold = vec![false; v.n_rows()];
            for &i in held {
                in_fold[i] = true;
            }
            let train: Vec<usize> = (0..v.n_rows()).filter(|&i| !in_fold[i]).collect();
            let tree = fit_tree(&v.select_rows(&train), features, outcome, cfg)?;
            evaluate(&tree, &v.select_rows(held))
        })
        .collect::<Result<_, _>>()?;
    let mean = MetricSummary::mean(&metrics.iter().map(Metrics::summary).collect::<Vec<_>>());
    Ok(CvReport { folds: metrics, mean })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    /// `(lower edge, count)`; bins are half-open `[lo, lo + width)`.
    pub bins: Vec<(f64, usize)>,
}

impl Histogram {
    pub fn build(values: &[f64], bin_width: f64, lo: f64, hi: f64) -> Self {
        let n_bins = ((hi - lo) / bin_width).ceil().max(1.0) as usize;
        let mut bins: Vec<(f64, usize)> = (0..n_bins).map(|b| (lo + b as f64 * bin_width, 0)).collect();
        for &x in values {
            let b = (((x - lo) / bin_width).floor().max(0.0) as usize).min(n_bins - 1);
            bins[b].1 += 1;
        }
        Self { bin_width, bins }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count\n");
        for &(lo, c) in &self.bins {
            let _ = writeln!(out, "{lo},{},{c}", lo + self.bin_width);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationConfig {
    pub n_trials: usize,
    pub folds: usize,
    pub tree: TreeConfig,
    /// Relative tolerance on the complete-case count.
    pub tolerance: f64,
    pub max_draws: usize,
    pub histogram_bin_width: f64,
}

impl Default for PermutationConfig {
    fn default() -> Self {
        Self { n_trials: 1000, folds: 10, tree: TreeConfig::default(), tolerance: 0.10, max_draws: 50, histogram_bin_width: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationTrial {
    pub features: Vec<String>,
    pub n_rows: usize,
    pub draws: usize,
    pub cv: MetricSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationReport {
    pub target_n: usize,
    pub trials: Vec<PermutationTrial>,
    pub mean: MetricSummary,
    /// Misclassification percentage across trials.
    pub histogram: Histogram,
}

/// Cross-validated trees on random feature subsets of `pool` whose complete-case count
/// is within tolerance of `target_n`.
///
/// Draw seeds derive from `seed`; every trial's cross-validation uses `seed` itself, so a
/// draw equal to a reference feature set reproduces that set's metrics.
pub fn permutation_baseline<S: AsRef<str>>(
    d: &Dataset,
    pool: &[S],
    n_features: usize,
    outcome: &str,
    target_n: usize,
    cfg: &PermutationConfig,
    seed: u64,
) -> Result<PermutationReport, TreeError> {
    if n_features == 0 || n_features > pool.len() {
        return Err(TreeError::PoolTooSmall { pool: pool.len(), wanted: n_features });
    }
    let pool: Vec<String> = pool.iter().map(|s| s.as_ref().to_string()).collect();
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let trial_seeds: Vec<u64> = (0..cfg.n_trials).map(|_| master.random()).collect();
    let tol = (cfg.tolerance * target_n as f64).floor() as usize;
    let trials: Vec<PermutationTrial> = trial_seeds
        .par_iter()
        .enumerate()
        .map(|(trial, &s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            for draw in 1..=cfg.max_draws {
                let mut picked = rand::seq::index::sample(&mut rng, pool.len(), n_features).into_vec();
                picked.sort_unstable();
                let features: Vec<String> = picked.iter().map(|&i| pool[i].clone()).collect();
                let mut cols = features.clone();
                cols.push(outcome.to_string());
                let view = d.complete_cases(&cols)?;
                if view.n_rows().abs_diff(target_n) > tol || view.n_rows() < cfg.folds {
                    continue;
                }
                let cv = kfold_cv(&view, &features, outcome, cfg.folds, &cfg.tree, seed)?;
                return Ok(PermutationTrial { features, n_rows: view.n_rows(), draws: draw, cv: cv.mean });
            }
            Err(TreeError::ExhaustedDraws { trial, target_n, retries: cfg.max_draws })
        })
        .collect::<Result<_, _>>()?;
    let summaries: Vec<MetricSummary> = trials.iter().map(|t| t.cv).collect();
    let miscls: Vec<f64> = summaries.iter().map(MetricSummary::misclassified_pct).collect();
    Ok(PermutationReport {
        target_n,
        mean: MetricSummary::mean(&summaries),
        histogram: Histogram::build(&miscls, cfg.histogram_bin_width, 0.0, 100.0),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ColumnSchema;

    fn outcome_col(labels: &[bool]) -> Vec<Option<f64>> {
        // level 0 is the positive class
        labels.iter().map(|&p| Some(if p { 0.0 } else { 1.0 })).collect()
    }

    fn dataset(x: Vec<f64>, labels: &[bool]) -> Dataset {
        Dataset::new(
            vec![ColumnSchema::continuous("x", "f"), ColumnSchema::categorical("OUTCOME", "outcome", 2)],
            vec![x.into_iter().map(Some).collect(), outcome_col(labels)],
        )
        .unwrap()
    }

    #[test]
    fn separable_one_dimensional_data() {
        let d = dataset(vec![0.1, 0.2, 0.3, 0.7, 0.8, 0.9], &[true, true, true, false, false, false]);
        let t = fit_tree(&d.view_all(), &["x"], "OUTCOME", &TreeConfig { max_depth: 1, ..Default::default() }).unwrap();
        match &t.root {
            TreeNode::Split { rule: SplitRule::Threshold { threshold }, .. } => assert!(*threshold > 0.3 && *threshold < 0.7),
            other => panic!("expected a split, got {other:?}"),
        }
        assert_eq!(evaluate(&t, &d.view_all()).unwrap().accuracy, 1.0);
    }

    #[test]
    fn pure_input_is_a_leaf() {
        let d = dataset(vec![1.0, 2.0, 3.0], &[false, false, false]);
        let t = fit_tree(&d.view_all(), &["x"], "OUTCOME", &TreeConfig::default()).unwrap();
        assert!(matches!(t.root, TreeNode::Leaf { predicted_positive: false, .. }));
    }

    #[test]
    fn value_at_threshold_goes_left() {
        let d = dataset(vec![0.0, 1.0], &[true, false]);
        let t = fit_tree(&d.view_all(), &["x"], "OUTCOME", &TreeConfig::default()).unwrap();
        assert!(t.predict(&[Some(0.5)]).unwrap());
        assert!(!t.predict(&[Some(0.5 + 1e-9)]).unwrap());
        assert!(matches!(t.predict(&[None]), Err(TreeError::MissingFeature(_))));
    }

    #[test]
    fn all_negative_predictor_metrics() {
        let m = Metrics::from_counts(0, 0, 194, 71);
        assert_eq!(m.sensitivity, 0.0);
        assert_eq!(m.specificity, 1.0);
        assert!((m.accuracy - 194.0 / 265.0).abs() < 1e-12);
    }

    #[test]
    fn folds_are_balanced() {
        let labels: Vec<bool> = (0..23).map(|i| i % 3 == 0).collect();
        let folds = stratified_folds(&labels, 5, 9).unwrap();
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        assert_eq!(sizes.iter().sum::<usize>(), 23);
        assert!(matches!(stratified_folds(&labels[..3], 5, 0), Err(TreeError::TooFewRows { .. })));
    }

    #[test]
    fn histogram_counts_everything() {
        let h = Histogram::build(&[0.0, 5.0, 99.9, 100.0], 10.0, 0.0, 100.0);
        assert_eq!(h.bins.len(), 10);
        assert_eq!(h.bins.iter().map(|b| b.1).sum::<usize>(), 4);
        assert_eq!(h.bins[9].1, 2);
    }

    #[test]
    fn dot_export_shows_counts() {
        let d = dataset(vec![0.1, 0.2, 0.8], &[true, true, false]);
        let t = fit_tree(&d.view_all(), &["x"], "OUTCOME", &TreeConfig::default()).unwrap();
        let dot = t.to_dot();
        assert!(dot.contains("3\\nx <= 0.500?\\n2/1"));
        assert!(dot.contains("#f4a6a6"));
    }
}
