//! Three-step workflow: per-category structure learning and feature selection, an
//! integrated graph with bivariate screening and an interpretable tree, then a
//! cross-validated comparison against random feature subsets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, Dataset, DatasetView, Kind};
use crate::effects::{annotate_strengths, EdgeEffect, EffectError};
use crate::graph::{GraphDump, GraphError, MixedGraph, PriorKnowledge, StyleConfig};
use crate::learn::{learn_structure_with, DSeparationOracle, DataCiTest, LearnConfig, LearnError};
use crate::stats::{fisher_exact, fold_increase, point_biserial, ContingencyTable2x2, StatsError};
use crate::tree::{
    evaluate, fit_tree, kfold_cv, permutation_baseline, CvReport, Histogram, MetricSummary, Metrics,
    PermutationConfig, PermutationReport, Tree, TreeConfig, TreeError, TreeNode,
};

#[derive(Error, Debug)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("no features were selected in step 1")]
    NothingSelected,
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Effect(#[from] EffectError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Category overrides by column name; other columns keep their schema category.
    pub categories: BTreeMap<String, String>,
    /// Outcome column; defaults to the schema's outcome column.
    pub outcome: Option<String>,
    pub prior_knowledge: Option<PathBuf>,
    pub alpha: f64,
    pub max_cond_size: Option<usize>,
    pub possible_dsep: bool,
    pub orientation_rules: bool,
    /// Forbid the outcome from causing any feature.
    pub outcome_is_sink: bool,
    /// Undirected hop radius around the outcome for feature selection.
    pub hops: usize,
    pub tree_max_depth: usize,
    pub min_samples_leaf: usize,
    pub cv_folds: usize,
    pub permutation_trials: usize,
    /// Features per random draw; defaults to the number the interpretable tree uses.
    pub permutation_features: Option<usize>,
    pub permutation_tolerance: f64,
    pub permutation_max_draws: usize,
    pub histogram_bin_width: f64,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            categories: BTreeMap::new(),
            outcome: None,
            prior_knowledge: None,
            alpha: 0.05,
            max_cond_size: Some(3),
            possible_dsep: true,
            orientation_rules: true,
            outcome_is_sink: true,
            hops: 2,
            tree_max_depth: 4,
            min_samples_leaf: 1,
            cv_folds: 10,
            permutation_trials: 1000,
            permutation_features: None,
            permutation_tolerance: 0.10,
            permutation_max_draws: 50,
            histogram_bin_width: 2.0,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn learn_config(&self) -> LearnConfig {
        LearnConfig {
            alpha: self.alpha,
            max_cond_size: self.max_cond_size,
            do_possible_dsep: self.possible_dsep,
            do_orientation: self.orientation_rules,
        }
    }

    pub fn tree_config(&self) -> TreeConfig {
        TreeConfig { max_depth: self.tree_max_depth, min_samples_leaf: self.min_samples_leaf, tie_predicts_positive: true }
    }
}

/// Dataset plus everything resolved from the configuration.
pub struct Pipeline<'a> {
    pub data: &'a Dataset,
    pub cfg: PipelineConfig,
    pub outcome: String,
    pub knowledge: PriorKnowledge,
    /// When set, structure learning queries d-separation in this DAG instead of the data.
    pub oracle: Option<MixedGraph>,
}

impl<'a> Pipeline<'a> {
    pub fn new(data: &'a Dataset, cfg: PipelineConfig) -> Result<Self, PipelineError> {
        cfg.learn_config().validate()?;
        if cfg.tree_max_depth == 0 {
            return Err(PipelineError::Config("tree_max_depth must be at least 1".into()));
        }
        let outcome = match &cfg.outcome {
            Some(o) => {
                data.column_index(o)?;
                o.clone()
            }
            None => data.column_schema(data.outcome_index()?).name.clone(),
        };
        for (col, cat) in &cfg.categories {
            data.column_index(col)?;
            if *col == outcome {
                return Err(PipelineError::Config(format!("outcome `{outcome}` cannot be put in category `{cat}`")));
            }
        }
        let mut knowledge = match &cfg.prior_knowledge {
            Some(p) => PriorKnowledge::load(p)?,
            None => PriorKnowledge::default(),
        };
        let names: Vec<&str> = data.names().collect();
        knowledge.validate(&names)?;
        if cfg.outcome_is_sink {
            for f in names.iter().filter(|&&n| n != outcome) {
                knowledge.forbid_directed(&outcome, f);
            }
        }
        Ok(Self { data, cfg, outcome, knowledge, oracle: None })
    }

    pub fn with_oracle(mut self, dag: MixedGraph) -> Self {
        self.oracle = Some(dag);
        self
    }

    pub fn with_knowledge(mut self, pk: PriorKnowledge) -> Result<Self, PipelineError> {
        let names: Vec<&str> = self.data.names().collect();
        pk.validate(&names)?;
        let sink: Vec<(String, String)> = self.knowledge.forbidden_directed.iter().filter(|(a, _)| *a == self.outcome).cloned().collect();
        self.knowledge = pk;
        for (a, b) in sink {
            self.knowledge.forbid_directed(&a, &b);
        }
        Ok(self)
    }

    /// Feature columns grouped by category, in first-appearance order.
    pub fn categories(&self) -> Vec<(String, Vec<String>)> {
        let mut out: Vec<(String, Vec<String>)> = Vec::new();
        for col in self.data.schema() {
            if col.name == self.outcome || col.is_outcome() {
                continue;
            }
            let cat = self.cfg.categories.get(&col.name).unwrap_or(&col.category).clone();
            match out.iter_mut().find(|(c, _)| *c == cat) {
                Some((_, cols)) => cols.push(col.name.clone()),
                None => out.push((cat, vec![col.name.clone()])),
            }
        }
        out
    }

    pub fn features(&self) -> Vec<String> {
        self.categories().into_iter().flat_map(|(_, cols)| cols).collect()
    }

    /// Complete cases over `features` + outcome, minus features constant on those rows.
    fn analysis_view(&self, features: &[String]) -> Result<(DatasetView<'a>, Vec<String>, Vec<String>), PipelineError> {
        let mut cols = features.to_vec();
        cols.push(self.outcome.clone());
        let view = self.data.complete_cases(&cols)?;
        let mut kept = Vec::new();
        let mut dropped = Vec::new();
        for f in features {
            let j = view.position(f)?;
            let values = view.numeric_column(j)?;
            if values.windows(2).all(|w| w[0] == w[1]) {
                dropped.push(f.clone());
            } else {
                kept.push(f.clone());
            }
        }
        let mut cols = kept.clone();
        cols.push(self.outcome.clone());
        Ok((view.with_columns(&cols)?, kept, dropped))
    }

    fn learn_graph(&self, view: &DatasetView<'_>) -> Result<(MixedGraph, usize), PipelineError> {
        let names = view.names();
        let lc = self.cfg.learn_config();
        let pk = self.knowledge.restrict(&names);
        let result = match &self.oracle {
            Some(dag) => {
                let observed = names.iter().map(|n| dag.index(n)).collect::<Result<Vec<_>, _>>()?;
                let oracle = DSeparationOracle::with_latents(dag.clone(), observed);
                learn_structure_with(&oracle, &names, &lc, &pk)?
            }
            None => {
                let test = DataCiTest::new(view)?;
                learn_structure_with(&test, &names, &lc, &pk)?
            }
        };
        Ok((result.graph, result.skeleton.tests_run))
    }

    fn analyze(&self, features: &[String]) -> Result<GraphAnalysis, PipelineError> {
        let (view, kept, dropped) = self.analysis_view(features)?;
        if kept.is_empty() || view.n_rows() < 2 {
            let mut names = kept.clone();
            names.push(self.outcome.clone());
            return Ok(GraphAnalysis {
                features: kept,
                dropped_constant: dropped,
                n_rows: view.n_rows(),
                tests_run: 0,
                graph: MixedGraph::new(&names)?,
                edges: Vec::new(),
            });
        }
        let (graph, tests_run) = self.learn_graph(&view)?;
        let (graph, edges) = annotate_strengths(&view, &graph, Some(&self.outcome))?;
        Ok(GraphAnalysis { features: kept, dropped_constant: dropped, n_rows: view.n_rows(), tests_run, graph, edges })
    }

    pub fn step1(&self) -> Result<Step1Report, PipelineError> {
        let cats = self.categories();
        let results: Vec<CategoryResult> = cats
            .par_iter()
            .map(|(cat, cols)| {
                let a = self.analyze(cols)?;
                let o = a.graph.index(&self.outcome)?;
                let near = a.graph.neighbors_within(o, self.cfg.hops);
                let selected = a.features.iter().filter(|f| near.contains(&a.graph.index(f).unwrap())).cloned().collect();
                log::info!("category {cat}: {} rows, {} edges", a.n_rows, a.graph.n_edges());
                Ok(CategoryResult { category: cat.clone(), analysis: a, selected })
            })
            .collect::<Result<_, PipelineError>>()?;
        let chosen: BTreeSet<&String> = results.iter().flat_map(|r| &r.selected).collect();
        let selected = self.features().into_iter().filter(|f| chosen.contains(f)).collect();
        Ok(Step1Report { categories: results, selected })
    }

    pub fn step2(&self, selected: &[String]) -> Result<Step2Report, PipelineError> {
        if selected.is_empty() {
            return Err(PipelineError::NothingSelected);
        }
        let integrated = self.analyze(selected)?;
        let (fisher, pbc) = self.bivariate(&integrated.features)?;
        let (view, _, _) = self.analysis_view(&integrated.features)?;
        let tree = fit_tree(&view, &integrated.features, &self.outcome, &self.cfg.tree_config())?;
        let train = evaluate(&tree, &view)?;
        let used = tree_features(&tree);
        Ok(Step2Report { n_complete: view.n_rows(), integrated, fisher, pbc, tree, tree_features: used, train })
    }

    /// Fisher exact tests for binary features and point-biserial correlations for the rest,
    /// each on the rows where that feature and the outcome are observed.
    pub fn bivariate(&self, features: &[String]) -> Result<(Vec<FisherRow>, Vec<PbcRow>), PipelineError> {
        let o = self.data.column_index(&self.outcome)?;
        let pos = self.data.positive_code(o) as f64;
        let mut fisher = Vec::new();
        let mut pbc = Vec::new();
        for f in features {
            let j = self.data.column_index(f)?;
            let pairs: Vec<(f64, bool)> = (0..self.data.n_rows())
                .filter_map(|r| Some((self.data.value(r, j)?, self.data.value(r, o)? == pos)))
                .collect();
            if self.data.column_schema(j).kind == Kind::Binary {
                fisher.push(fisher_row(f, &pairs)?);
            } else {
                let group: Vec<bool> = pairs.iter().map(|&(_, positive)| !positive).collect();
                let values: Vec<f64> = pairs.iter().map(|&(x, _)| x).collect();
                let t = point_biserial(&group, &values)?;
                pbc.push(PbcRow { feature: f.clone(), n: pairs.len(), r: t.effect.unwrap_or(0.0), p_value: t.p_value });
            }
        }
        Ok((fisher, pbc))
    }

    pub fn step3(&self, tree_features: &[String]) -> Result<Step3Report, PipelineError> {
        let mut cols = tree_features.to_vec();
        cols.push(self.outcome.clone());
        let view = self.data.complete_cases(&cols)?;
        let tc = self.cfg.tree_config();
        let cv = kfold_cv(&view, tree_features, &self.outcome, self.cfg.cv_folds, &tc, self.cfg.seed)?;
        let n_features = self.cfg.permutation_features.unwrap_or(tree_features.len());
        let permutation = if self.cfg.permutation_trials == 0 || n_features == 0 {
            None
        } else {
            let pc = PermutationConfig {
                n_trials: self.cfg.permutation_trials,
                folds: self.cfg.cv_folds,
                tree: tc,
                tolerance: self.cfg.permutation_tolerance,
                max_draws: self.cfg.permutation_max_draws,
                histogram_bin_width: self.cfg.histogram_bin_width,
            };
            let pool = self.features();
            let report = permutation_baseline(self.data, &pool, n_features, &self.outcome, view.n_rows(), &pc, self.cfg.seed)?;
            Some(Comparison::new(report, &cv.mean, tree_features))
        };
        Ok(Step3Report { features: tree_features.to_vec(), n_rows: view.n_rows(), cv, permutation })
    }

    pub fn run(&self) -> Result<PipelineReport, PipelineError> {
        let step1 = self.step1()?;
        let step2 = self.step2(&step1.selected)?;
        let step3 = self.step3(&step2.tree_features)?;
        Ok(PipelineReport {
            outcome: self.outcome.clone(),
            n_subjects: self.data.n_rows(),
            n_features: self.features().len(),
            oracle_mode: self.oracle.is_some(),
            config: self.cfg.clone(),
            step1,
            step2,
            step3,
        })
    }
}

/// Features queried by any split, in the tree's feature order.
pub fn tree_features(t: &Tree) -> Vec<String> {
    fn walk(n: &TreeNode, used: &mut BTreeSet<usize>) {
        if let TreeNode::Split { index, left, right, .. } = n {
            used.insert(*index);
            walk(left, used);
            walk(right, used);
        }
    }
    let mut used = BTreeSet::new();
    walk(&t.root, &mut used);
    used.into_iter().map(|i| t.features[i].clone()).collect()
}

fn fisher_row(feature: &str, pairs: &[(f64, bool)]) -> Result<FisherRow, PipelineError> {
    let (mut a, mut b, mut c, mut d) = (0, 0, 0, 0);
    for &(x, positive) in pairs {
        match (x == 1.0, positive) {
            (true, true) => a += 1,
            (true, false) => b += 1,
            (false, true) => c += 1,
            (false, false) => d += 1,
        }
    }
    let t = ContingencyTable2x2::new(a, b, c, d);
    let p_value = fisher_exact(&t)?.p_value;
    let with = t.positive_rate_present();
    let without = t.positive_rate_absent();
    let base = t.positive_rate();
    let marker = if a + b == 0 || base <= 0.0 || base >= 1.0 {
        None
    } else if with > base {
        Some(FoldMarker { toward: FoldDirection::Positive, factor: fold_increase(with, base)?.rounded })
    } else {
        Some(FoldMarker { toward: FoldDirection::Negative, factor: fold_increase(1.0 - with, 1.0 - base)?.rounded })
    };
    Ok(FisherRow {
        feature: feature.to_string(),
        table: [[a, b], [c, d]],
        pct_positive_with: 100.0 * with,
        pct_negative_with: 100.0 * (1.0 - with),
        pct_positive_without: 100.0 * without,
        pct_negative_without: 100.0 * (1.0 - without),
        p_value,
        fold: marker.filter(|m| m.factor >= FOLD_DISPLAY_MIN),
    })
}

/// Smallest rounded fold factor that is displayed.
pub const FOLD_DISPLAY_MIN: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphAnalysis {
    pub features: Vec<String>,
    pub dropped_constant: Vec<String>,
    pub n_rows: usize,
    pub tests_run: usize,
    #[serde(serialize_with = "ser_graph", deserialize_with = "de_graph")]
    pub graph: MixedGraph,
    pub edges: Vec<EdgeEffect>,
}

fn ser_graph<S: serde::Serializer>(g: &MixedGraph, s: S) -> Result<S::Ok, S::Error> {
    g.to_dump().serialize(s)
}

fn de_graph<'de, D: serde::Deserializer<'de>>(d: D) -> Result<MixedGraph, D::Error> {
    GraphDump::deserialize(d)?.into_graph().map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryResult {
    pub category: String,
    #[serde(flatten)]
    pub analysis: GraphAnalysis,
    /// Features within the hop radius of the outcome.
    pub selected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step1Report {
    pub categories: Vec<CategoryResult>,
    pub selected: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoldDirection {
    /// Excess of the adverse outcome (drawn red).
    Positive,
    /// Excess of the favourable outcome (drawn green).
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMarker {
    pub toward: FoldDirection,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherRow {
    pub feature: String,
    /// `[[present & positive, present & negative], [absent & positive, absent & negative]]`.
    pub table: [[u64; 2]; 2],
    pub pct_positive_with: f64,
    pub pct_negative_with: f64,
    pub pct_positive_without: f64,
    pub pct_negative_without: f64,
    pub p_value: f64,
    pub fold: Option<FoldMarker>,
}

impl FisherRow {
    /// One line, fold factor in brackets after the percentage it refers to; `red`/`green`
    /// tags give the direction.
    pub fn render(&self) -> String {
        let tag = |dir: FoldDirection| {
            self.fold
                .as_ref()
                .filter(|m| m.toward == dir)
                .map(|m| format!(" (x{:.1} {})", m.factor, if dir == FoldDirection::Positive { "red" } else { "green" }))
                .unwrap_or_default()
        };
        format!(
            "{:<20} {:>5.1}%{} {:>5.1}%{} {:>5.1}% {:>5.1}% p={:.2e}",
            self.feature,
            self.pct_positive_with,
            tag(FoldDirection::Positive),
            self.pct_negative_with,
            tag(FoldDirection::Negative),
            self.pct_positive_without,
            self.pct_negative_without,
            self.p_value
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PbcRow {
    pub feature: String,
    pub n: usize,
    /// Correlation with membership in the negative (favourable) outcome class.
    pub r: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step2Report {
    /// Rows complete on every integrated feature and the outcome.
    pub n_complete: usize,
    pub integrated: GraphAnalysis,
    pub fisher: Vec<FisherRow>,
    pub pbc: Vec<PbcRow>,
    pub tree: Tree,
    pub tree_features: Vec<String>,
    pub train: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub baseline: PermutationReport,
    /// Share of trials whose misclassification is at or below the reference.
    pub reference_quantile: f64,
    pub baseline_p05: f64,
    pub baseline_p10: f64,
    pub specificity_gap: f64,
    /// Share of trials that drew at least one of the reference features.
    pub draws_with_reference_features: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl Comparison {
    pub fn new(baseline: PermutationReport, reference: &MetricSummary, reference_features: &[String]) -> Self {
        let mut mis: Vec<f64> = baseline.trials.iter().map(|t| t.cv.misclassified_pct()).collect();
        mis.sort_by(f64::total_cmp);
        let ref_mis = reference.misclassified_pct();
        let n = mis.len().max(1) as f64;
        let refs: BTreeSet<&String> = reference_features.iter().collect();
        Self {
            reference_quantile: mis.iter().filter(|&&m| m <= ref_mis).count() as f64 / n,
            baseline_p05: quantile(&mis, 0.05),
            baseline_p10: quantile(&mis, 0.10),
            specificity_gap: reference.specificity - baseline.mean.specificity,
            draws_with_reference_features: baseline.trials.iter().filter(|t| t.features.iter().any(|f| refs.contains(f))).count() as f64 / n,
            baseline,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step3Report {
    pub features: Vec<String>,
    pub n_rows: usize,
    pub cv: CvReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Comparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub outcome: String,
    pub n_subjects: usize,
    pub n_features: usize,
    pub oracle_mode: bool,
    pub config: PipelineConfig,
    pub step1: Step1Report,
    pub step2: Step2Report,
    pub step3: Step3Report,
}

impl PipelineReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn graph_style(title: &str, outcome: &str) -> StyleConfig {
    StyleConfig { title: title.to_string(), undirected: true, highlight: Some(outcome.to_string()), ..Default::default() }
}

fn file_stem(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn write_step1(dir: &Path, outcome: &str, r: &Step1Report) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir)?;
    for c in &r.categories {
        let title = format!("category {}", c.category);
        std::fs::write(dir.join(format!("step1_{}.dot", file_stem(&c.category))), c.analysis.graph.to_dot(&graph_style(&title, outcome)))?;
    }
    Ok(())
}

pub fn write_step2(dir: &Path, outcome: &str, r: &Step2Report) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("integrated.dot"), r.integrated.graph.to_dot(&graph_style("integrated", outcome)))?;
    std::fs::write(dir.join("tree.dot"), r.tree.to_dot())?;
    std::fs::write(dir.join("tree.json"), r.tree.to_json())?;
    let mut table = String::new();
    for row in &r.fisher {
        let _ = writeln!(table, "{}", row.render());
    }
    for row in &r.pbc {
        let _ = writeln!(table, "{:<20} r={:+.2} p={:.2e} n={}", row.feature, row.r, row.p_value, row.n);
    }
    std::fs::write(dir.join("bivariate.txt"), table)?;
    Ok(())
}

pub fn write_step3(dir: &Path, r: &Step3Report) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir)?;
    if let Some(c) = &r.permutation {
        std::fs::write(dir.join("permutation_histogram.csv"), histogram_with_reference(&c.baseline.histogram, &r.cv.mean))?;
    }
    Ok(())
}

fn histogram_with_reference(h: &Histogram, reference: &MetricSummary) -> String {
    let mut out = h.to_csv();
    let _ = writeln!(out, "# reference_misclassified_pct,{}", reference.misclassified_pct());
    out
}

/// Writes `report.json` and the DOT / CSV artifacts of every step into `dir`.
pub fn write_report(dir: &Path, r: &PipelineReport) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), r.to_json())?;
    write_step1(dir, &r.outcome, &r.step1)?;
    write_step2(dir, &r.outcome, &r.step2)?;
    write_step3(dir, &r.step3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ColumnSchema;

    #[test]
    fn copd_fisher_row_matches_reference_percentages() {
        let mut pairs = Vec::new();
        for (x, positive, count) in [(1.0, true, 20), (1.0, false, 9), (0.0, true, 51), (0.0, false, 185)] {
            pairs.extend(std::iter::repeat_n((x, positive), count));
        }
        let row = fisher_row("COPD", &pairs).unwrap();
        assert_eq!(format!("{:.1}", row.pct_positive_with), "69.0");
        assert_eq!(format!("{:.1}", row.pct_positive_without), "21.6");
        assert_eq!(row.fold, Some(FoldMarker { toward: FoldDirection::Positive, factor: 2.6 }));
        assert!(row.render().contains("(x2.6 red)"));
    }

    #[test]
    fn weak_factor_is_not_displayed() {
        // 10 of 43 positive against a 71/265 base
        let mut pairs = Vec::new();
        for (x, positive, count) in [(1.0, true, 10), (1.0, false, 33), (0.0, true, 61), (0.0, false, 161)] {
            pairs.extend(std::iter::repeat_n((x, positive), count));
        }
        assert_eq!(fisher_row("FATIGUE", &pairs).unwrap().fold, None);
    }

    #[test]
    fn outcome_in_a_category_is_rejected() {
        let d = Dataset::new(
            vec![ColumnSchema::continuous("x", "a"), ColumnSchema::categorical("y", "outcome", 2)],
            vec![vec![Some(0.0), Some(1.0)], vec![Some(0.0), Some(1.0)]],
        )
        .unwrap();
        let cfg = PipelineConfig { categories: BTreeMap::from([("y".into(), "a".into())]), ..Default::default() };
        assert!(matches!(Pipeline::new(&d, cfg), Err(PipelineError::Config(_))));
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = PipelineConfig { seed: 7, permutation_features: Some(5), ..Default::default() };
        assert_eq!(PipelineConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
        assert_eq!(PipelineConfig::from_toml_str("alpha = 0.01").unwrap().alpha, 0.01);
    }
}
