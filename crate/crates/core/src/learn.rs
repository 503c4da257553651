//! Constraint-based structure learning: PC-stable adjacency search, v-structures,
//! Possible-D-SEP pruning and FCI orientation rules.

use std::collections::{BTreeSet, VecDeque};

use itertools::Itertools;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{standardize, DataError, DatasetView};
use crate::graph::{GraphError, Mark, MixedGraph, PriorKnowledge, ResolvedKnowledge, SepSetStore};
use crate::stats::{fisher_z_ci_test, g_squared_test, StatsError};

#[derive(Error, Debug)]
pub enum LearnError {
    #[error("view has missing values; restrict to complete cases first")]
    IncompleteView,
    #[error("structure learning needs at least two columns, got {0}")]
    TooFewColumns(usize),
    #[error("invalid learning configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnConfig {
    pub alpha: f64,
    pub max_cond_size: Option<usize>,
    pub do_possible_dsep: bool,
    pub do_orientation: bool,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self { alpha: 0.05, max_cond_size: Some(3), do_possible_dsep: true, do_orientation: true }
    }
}

impl LearnConfig {
    pub fn validate(&self) -> Result<(), LearnError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(LearnError::InvalidConfig(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }

    fn level_allowed(&self, l: usize) -> bool {
        self.max_cond_size.is_none_or(|m| l <= m)
    }
}

/// Conditional-independence test over variables `0..n_vars()`. Returns a p-value.
pub trait CiTest: Sync {
    fn n_vars(&self) -> usize;
    fn p_value(&self, x: usize, y: usize, s: &[usize]) -> Result<f64, LearnError>;
}

/// Data-driven test: G² when `x`, `y` and every conditioning variable are
/// categorical, Fisher-z partial correlation otherwise.
pub struct DataCiTest<'a> {
    view: DatasetView<'a>,
    corr: DMatrix<f64>,
    categorical: Vec<bool>,
}

impl<'a> DataCiTest<'a> {
    pub fn new(view: &DatasetView<'a>) -> Result<Self, LearnError> {
        if !view.is_complete() {
            return Err(LearnError::IncompleteView);
        }
        let corr = standardize(view)?.correlation();
        let categorical = (0..view.n_cols()).map(|j| view.schema(j).kind.is_categorical()).collect();
        Ok(Self { view: view.clone(), corr, categorical })
    }
}

impl CiTest for DataCiTest<'_> {
    fn n_vars(&self) -> usize {
        self.view.n_cols()
    }

    fn p_value(&self, x: usize, y: usize, s: &[usize]) -> Result<f64, LearnError> {
        let all_categorical = [x, y].iter().chain(s).all(|&j| self.categorical[j]);
        let r = if all_categorical {
            g_squared_test(x, y, s, &self.view)?
        } else {
            fisher_z_ci_test(x, y, s, &self.corr, self.view.n_rows())?
        };
        Ok(r.p_value)
    }
}

/// Exact d-separation in a known DAG: p = 1 when separated, 0 otherwise.
///
/// `observed[i]` is the DAG node standing for test variable `i`; DAG nodes not listed are latent.
#[derive(Debug, Clone)]
pub struct DSeparationOracle {
    dag: MixedGraph,
    observed: Vec<usize>,
}

impl DSeparationOracle {
    pub fn new(dag: MixedGraph) -> Self {
        let observed = (0..dag.n()).collect();
        Self { dag, observed }
    }

    pub fn with_latents(dag: MixedGraph, observed: Vec<usize>) -> Self {
        Self { dag, observed }
    }

    pub fn observed_names(&self) -> Vec<String> {
        self.observed.iter().map(|&i| self.dag.name(i).to_string()).collect()
    }
}

impl CiTest for DSeparationOracle {
    fn n_vars(&self) -> usize {
        self.observed.len()
    }

    fn p_value(&self, x: usize, y: usize, s: &[usize]) -> Result<f64, LearnError> {
        let s: Vec<usize> = s.iter().map(|&j| self.observed[j]).collect();
        let sep = d_separated(&self.dag, self.observed[x], self.observed[y], &s);
        Ok(if sep { 1.0 } else { 0.0 })
    }
}

/// Whether `x` and `y` are d-separated by `z` in the DAG `dag`, via the moralized ancestral graph.
pub fn d_separated(dag: &MixedGraph, x: usize, y: usize, z: &[usize]) -> bool {
    let n = dag.n();
    let mut anc = vec![false; n];
    let mut stack: Vec<usize> = [x, y].iter().chain(z).copied().collect();
    while let Some(u) = stack.pop() {
        if !anc[u] {
            anc[u] = true;
            stack.extend(dag.parents(u));
        }
    }
    let mut moral = vec![Vec::new(); n];
    for c in (0..n).filter(|&c| anc[c]) {
        let ps = dag.parents(c);
        for (i, &p) in ps.iter().enumerate() {
            moral[p].push(c);
            moral[c].push(p);
            for &q in &ps[i + 1..] {
                moral[p].push(q);
                moral[q].push(p);
            }
        }
    }
    let mut blocked = vec![false; n];
    for &s in z {
        blocked[s] = true;
    }
    if blocked[x] || blocked[y] {
        return true;
    }
    let mut seen = vec![false; n];
    seen[x] = true;
    let mut queue = VecDeque::from([x]);
    while let Some(u) = queue.pop_front() {
        if u == y {
            return false;
        }
        for &w in &moral[u] {
            if !seen[w] && !blocked[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonResult {
    /// Adjacencies only; all marks are circles.
    pub graph: MixedGraph,
    pub sepsets: SepSetStore,
    pub tests_run: usize,
}

fn first_separating_set(
    test: &dyn CiTest,
    x: usize,
    y: usize,
    candidates: &[usize],
    size: usize,
    alpha: f64,
    tests: &mut usize,
) -> Result<Option<Vec<usize>>, LearnError> {
    for s in candidates.iter().copied().combinations(size) {
        *tests += 1;
        if test.p_value(x, y, &s)? > alpha {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// PC-stable adjacency search over a complete data view.
pub fn learn_skeleton(v: &DatasetView<'_>, cfg: &LearnConfig, pk: &PriorKnowledge) -> Result<SkeletonResult, LearnError> {
    if v.n_cols() < 2 {
        return Err(LearnError::TooFewColumns(v.n_cols()));
    }
    let test = DataCiTest::new(v)?;
    learn_skeleton_with(&test, &v.names(), cfg, pk)
}

/// PC-stable adjacency search with an arbitrary CI test.
///
/// Within a level every pair is tested against the adjacency sets frozen at the
/// start of the level; removals are applied afterwards. Candidate conditioning sets
/// are tried in lexicographic order and the first one accepted is kept.
pub fn learn_skeleton_with<S: AsRef<str>>(
    test: &dyn CiTest,
    names: &[S],
    cfg: &LearnConfig,
    pk: &PriorKnowledge,
) -> Result<SkeletonResult, LearnError> {
    cfg.validate()?;
    if names.len() != test.n_vars() {
        return Err(LearnError::InvalidConfig(format!(
            "{} names for a test over {} variables",
            names.len(),
            test.n_vars()
        )));
    }
    if names.len() < 2 {
        return Err(LearnError::TooFewColumns(names.len()));
    }
    pk.validate(names)?;
    let knowledge = pk.resolve(names);
    let mut g = MixedGraph::complete(names)?;
    let mut sepsets = SepSetStore::default();
    for &(u, v) in &knowledge.forbidden {
        g.remove_edge(u, v);
        sepsets.insert(u, v, Vec::new(), true);
    }
    let mut tests_run = 0;
    let mut level = 0;
    while cfg.level_allowed(level) {
        let adj: Vec<Vec<usize>> = (0..g.n()).map(|u| g.neighbors(u)).collect();
        let pending: Vec<(usize, usize)> = g
            .skeleton()
            .into_iter()
            .filter(|&(u, v)| !knowledge.is_required(u, v))
            .filter(|&(u, v)| adj[u].len() > level || adj[v].len() > level)
            .collect();
        if pending.is_empty() {
            break;
        }
        let results: Vec<Result<(usize, usize, Option<Vec<usize>>, usize), LearnError>> = pending
            .par_iter()
            .map(|&(u, v)| {
                let mut tests = 0;
                for (x, y) in [(u, v), (v, u)] {
                    let cand: Vec<usize> = adj[x].iter().copied().filter(|&w| w != y).collect();
                    if cand.len() < level {
                        continue;
                    }
                    if let Some(s) = first_separating_set(test, x, y, &cand, level, cfg.alpha, &mut tests)? {
                        return Ok((u, v, Some(s), tests));
                    }
                }
                Ok((u, v, None, tests))
            })
            .collect();
        for r in results {
            let (u, v, sep, tests) = r?;
            tests_run += tests;
            if let Some(s) = sep {
                g.remove_edge(u, v);
                sepsets.insert(u, v, s, false);
            }
        }
        log::debug!("level {level}: {} edges remain, {tests_run} tests so far", g.n_edges());
        level += 1;
    }
    Ok(SkeletonResult { graph: g, sepsets, tests_run })
}

/// Arrowheads into `z` for every unshielded triple `x – z – y` with `z` outside sepset(x, y).
///
/// Pairs removed by prior knowledge carry no test evidence and are skipped.
pub fn orient_v_structures(s: &SkeletonResult) -> MixedGraph {
    orient_v_structures_on(&s.graph, &s.sepsets)
}

fn orient_v_structures_on(skeleton: &MixedGraph, sepsets: &SepSetStore) -> MixedGraph {
    let mut g = skeleton.circle_skeleton();
    for z in 0..g.n() {
        let adj = skeleton.neighbors(z);
        for (i, &x) in adj.iter().enumerate() {
            for &y in &adj[i + 1..] {
                if skeleton.is_adjacent(x, y) {
                    continue;
                }
                if sepsets.contains(x, y, z) == Some(false) {
                    g.set_mark(x, z, Mark::Arrow);
                    g.set_mark(y, z, Mark::Arrow);
                }
            }
        }
    }
    g
}

/// For each forbidden directed pair `a → b` that is adjacent, puts an arrowhead at `a`.
pub fn apply_directed_knowledge(g: &mut MixedGraph, knowledge: &ResolvedKnowledge) {
    for &(a, b) in &knowledge.forbidden_directed {
        if g.is_adjacent(a, b) {
            g.set_mark(b, a, Mark::Arrow);
        }
    }
}

/// Possible-D-SEP(x): nodes reachable from `x` along paths on which every inner
/// node is a collider or the apex of a triangle.
pub fn possible_dsep(g: &MixedGraph, x: usize) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    for w in g.neighbors(x) {
        out.insert(w);
        seen.insert((x, w));
        queue.push_back((x, w));
    }
    while let Some((prev, cur)) = queue.pop_front() {
        for next in g.neighbors(cur) {
            if next == prev || next == x {
                continue;
            }
            let collider = g.mark(prev, cur) == Some(Mark::Arrow) && g.mark(next, cur) == Some(Mark::Arrow);
            if (collider || g.is_adjacent(prev, next)) && seen.insert((cur, next)) {
                out.insert(next);
                queue.push_back((cur, next));
            }
        }
    }
    out.remove(&x);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdsepResult {
    pub skeleton: SkeletonResult,
    /// Re-oriented v-structures on the pruned skeleton.
    pub graph: MixedGraph,
    pub removed: Vec<(usize, usize)>,
}

/// Extra removals conditioning on subsets of Possible-D-SEP, then v-structures re-oriented.
///
/// Possible-D-SEP sets are computed once from the input graph. With the stage disabled the
/// input comes back unchanged.
pub fn possible_dsep_prune<S: AsRef<str>>(
    g: &MixedGraph,
    sepsets: &SepSetStore,
    test: &dyn CiTest,
    names: &[S],
    cfg: &LearnConfig,
    pk: &PriorKnowledge,
) -> Result<PdsepResult, LearnError> {
    cfg.validate()?;
    let skeleton_in = SkeletonResult { graph: g.circle_skeleton(), sepsets: sepsets.clone(), tests_run: 0 };
    if !cfg.do_possible_dsep {
        return Ok(PdsepResult { skeleton: skeleton_in, graph: g.clone(), removed: Vec::new() });
    }
    let knowledge = pk.resolve(names);
    let pdsep: Vec<BTreeSet<usize>> = (0..g.n()).map(|x| possible_dsep(g, x)).collect();
    let mut skel = g.circle_skeleton();
    let mut sepsets = sepsets.clone();
    let mut tests_run = 0;
    let mut removed = Vec::new();
    for (u, v) in g.skeleton() {
        if knowledge.is_required(u, v) {
            continue;
        }
        let mut found = None;
        'search: for (x, y) in [(u, v), (v, u)] {
            let cand: Vec<usize> = pdsep[x].iter().copied().filter(|&w| w != y).collect();
            let cap = cfg.max_cond_size.map_or(cand.len(), |m| m.min(cand.len()));
            for size in 0..=cap {
                if let Some(s) = first_separating_set(test, x, y, &cand, size, cfg.alpha, &mut tests_run)? {
                    found = Some(s);
                    break 'search;
                }
            }
        }
        if let Some(s) = found {
            skel.remove_edge(u, v);
            sepsets.insert(u, v, s, false);
            removed.push((u, v));
        }
    }
    let mut graph = orient_v_structures_on(&skel, &sepsets);
    apply_directed_knowledge(&mut graph, &knowledge);
    Ok(PdsepResult { skeleton: SkeletonResult { graph: skel, sepsets, tests_run }, graph, removed })
}

/// Is there a directed path `from ⇝ to` using only fully directed edges?
fn directed_path(g: &MixedGraph, from: usize, to: usize) -> bool {
    let mut seen = vec![false; g.n()];
    let mut stack = vec![from];
    while let Some(u) = stack.pop() {
        if u == to {
            return true;
        }
        if !seen[u] {
            seen[u] = true;
            stack.extend(g.children(u));
        }
    }
    false
}

/// Turns edge `b – c` into `b → c` unless that would close a directed cycle.
fn make_directed(g: &mut MixedGraph, b: usize, c: usize) -> bool {
    if g.is_directed(b, c) || directed_path(g, c, b) || g.mark(c, b) == Some(Mark::Arrow) {
        return false;
    }
    g.set_mark(b, c, Mark::Arrow);
    g.set_mark(c, b, Mark::Tail);
    true
}

fn rule1(g: &mut MixedGraph) -> bool {
    let mut changed = false;
    for b in 0..g.n() {
        for a in g.neighbors(b) {
            if g.mark(a, b) != Some(Mark::Arrow) {
                continue;
            }
            for c in g.neighbors(b) {
                if c == a || g.is_adjacent(a, c) || g.mark(c, b) != Some(Mark::Circle) || g.mark(b, c) == Some(Mark::Tail) {
                    continue;
                }
                changed |= make_directed(g, b, c);
            }
        }
    }
    changed
}

fn rule2(g: &mut MixedGraph) -> bool {
    let mut changed = false;
    for a in 0..g.n() {
        for c in g.neighbors(a) {
            if g.mark(a, c) != Some(Mark::Circle) {
                continue;
            }
            let hit = g.neighbors(a).into_iter().filter(|&b| b != c && g.is_adjacent(b, c)).any(|b| {
                (g.is_directed(a, b) && g.mark(b, c) == Some(Mark::Arrow))
                    || (g.mark(a, b) == Some(Mark::Arrow) && g.is_directed(b, c))
            });
            if hit {
                g.set_mark(a, c, Mark::Arrow);
                changed = true;
            }
        }
    }
    changed
}

fn rule3(g: &mut MixedGraph) -> bool {
    let mut changed = false;
    for b in 0..g.n() {
        for d in g.neighbors(b) {
            if g.mark(d, b) != Some(Mark::Circle) {
                continue;
            }
            let into_b: Vec<usize> =
                g.neighbors(b).into_iter().filter(|&w| w != d && g.mark(w, b) == Some(Mark::Arrow)).collect();
            let hit = into_b.iter().tuple_combinations().any(|(&a, &c)| {
                !g.is_adjacent(a, c)
                    && g.is_adjacent(a, d)
                    && g.is_adjacent(c, d)
                    && g.mark(a, d) == Some(Mark::Circle)
                    && g.mark(c, d) == Some(Mark::Circle)
            });
            if hit {
                g.set_mark(d, b, Mark::Arrow);
                changed = true;
            }
        }
    }
    changed
}

/// Shortest discriminating path `<d, …, a, b, c>` for `b`, returning `d`.
fn discriminating_endpoint(g: &MixedGraph, a: usize, b: usize, c: usize) -> Option<usize> {
    // each state: (node on the path, node after it towards b); all path nodes visited once
    let mut visited = vec![false; g.n()];
    visited[a] = true;
    visited[b] = true;
    visited[c] = true;
    let mut queue = VecDeque::from([(a, b)]);
    while let Some((w, next)) = queue.pop_front() {
        debug_assert_eq!(g.mark(next, w), Some(Mark::Arrow));
        for p in g.neighbors(w) {
            if visited[p] || g.mark(p, w) != Some(Mark::Arrow) {
                continue;
            }
            if !g.is_adjacent(p, c) {
                return Some(p);
            }
            if g.is_directed(p, c) {
                visited[p] = true;
                queue.push_back((p, w));
            }
        }
    }
    None
}

fn rule4(g: &mut MixedGraph, sepsets: &SepSetStore) -> bool {
    let mut changed = false;
    for b in 0..g.n() {
        for c in g.neighbors(b) {
            if g.mark(c, b) != Some(Mark::Circle) {
                continue;
            }
            for a in g.neighbors(b) {
                if a == c || !g.is_directed(a, c) || g.mark(b, a) != Some(Mark::Arrow) {
                    continue;
                }
                let Some(d) = discriminating_endpoint(g, a, b, c) else { continue };
                match sepsets.contains(d, c, b) {
                    Some(true) => changed |= make_directed(g, b, c),
                    Some(false) => {
                        g.set_mark(a, b, Mark::Arrow);
                        g.set_mark(c, b, Mark::Arrow);
                        g.set_mark(b, c, Mark::Arrow);
                        changed = true;
                    }
                    None => {}
                }
                if g.mark(c, b) != Some(Mark::Circle) {
                    break;
                }
            }
        }
    }
    changed
}

fn rule8(g: &mut MixedGraph) -> bool {
    let mut changed = false;
    for a in 0..g.n() {
        for c in g.neighbors(a) {
            if g.mark(a, c) != Some(Mark::Arrow) || g.mark(c, a) != Some(Mark::Circle) {
                continue;
            }
            let hit = g.neighbors(a).into_iter().filter(|&b| b != c).any(|b| {
                g.is_directed(b, c)
                    && (g.is_directed(a, b) || (g.mark(a, b) == Some(Mark::Circle) && g.mark(b, a) == Some(Mark::Tail)))
            });
            if hit && !directed_path(g, c, a) {
                g.set_mark(c, a, Mark::Tail);
                changed = true;
            }
        }
    }
    changed
}

/// FCI propagation rules R1–R4 and R8, applied until nothing changes.
///
/// Only circle marks are ever rewritten, and no rule application may close a
/// directed cycle among fully directed edges.
pub fn apply_orientation_rules(g: &MixedGraph, sepsets: &SepSetStore) -> MixedGraph {
    let mut g = g.clone();
    loop {
        let mut changed = rule1(&mut g);
        changed |= rule2(&mut g);
        changed |= rule3(&mut g);
        changed |= rule4(&mut g, sepsets);
        changed |= rule8(&mut g);
        if !changed {
            return g;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnResult {
    pub skeleton: SkeletonResult,
    pub graph: MixedGraph,
    pub pdsep_removed: Vec<(usize, usize)>,
}

/// Full FCI-style run: skeleton, v-structures, optional Possible-D-SEP pruning, optional rules.
pub fn learn_structure_with<S: AsRef<str>>(
    test: &dyn CiTest,
    names: &[S],
    cfg: &LearnConfig,
    pk: &PriorKnowledge,
) -> Result<LearnResult, LearnError> {
    let skel = learn_skeleton_with(test, names, cfg, pk)?;
    let knowledge = pk.resolve(names);
    let mut graph = orient_v_structures(&skel);
    apply_directed_knowledge(&mut graph, &knowledge);
    let pd = possible_dsep_prune(&graph, &skel.sepsets, test, names, cfg, pk)?;
    let mut skeleton = pd.skeleton;
    skeleton.tests_run += skel.tests_run;
    let mut graph = pd.graph;
    if cfg.do_orientation {
        graph = apply_orientation_rules(&graph, &skeleton.sepsets);
    }
    Ok(LearnResult { skeleton, graph, pdsep_removed: pd.removed })
}

pub fn learn_structure(v: &DatasetView<'_>, cfg: &LearnConfig, pk: &PriorKnowledge) -> Result<LearnResult, LearnError> {
    if v.n_cols() < 2 {
        return Err(LearnError::TooFewColumns(v.n_cols()));
    }
    let test = DataCiTest::new(v)?;
    learn_structure_with(&test, &v.names(), cfg, pk)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> MixedGraph {
        MixedGraph::from_directed(&["X", "Z", "Y"], &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn d_separation_basics() {
        let g = chain();
        assert!(!d_separated(&g, 0, 2, &[]));
        assert!(d_separated(&g, 0, 2, &[1]));
        let collider = MixedGraph::from_directed(&["X", "Z", "Y"], &[(0, 1), (2, 1)]).unwrap();
        assert!(d_separated(&collider, 0, 2, &[]));
        assert!(!d_separated(&collider, 0, 2, &[1]));
    }

    #[test]
    fn oracle_chain_skeleton_and_sepset() {
        let oracle = DSeparationOracle::new(chain());
        let s = learn_skeleton_with(&oracle, &["X", "Z", "Y"], &LearnConfig::default(), &PriorKnowledge::default()).unwrap();
        assert_eq!(s.graph.skeleton(), BTreeSet::from([(0, 1), (1, 2)]));
        assert_eq!(s.sepsets.get(0, 2).unwrap().set, vec![1]);
        assert_eq!(orient_v_structures(&s), s.graph);
    }

    #[test]
    fn forbidden_pair_is_removed_with_flag() {
        let oracle = DSeparationOracle::new(chain());
        let mut pk = PriorKnowledge::default();
        pk.forbid("X", "Z");
        let s = learn_skeleton_with(&oracle, &["X", "Z", "Y"], &LearnConfig::default(), &pk).unwrap();
        assert!(!s.graph.is_adjacent(0, 1));
        assert!(s.sepsets.get(0, 1).unwrap().by_knowledge);
    }

    #[test]
    fn collider_gets_arrowheads() {
        let dag = MixedGraph::from_directed(&["X", "Z", "Y"], &[(0, 1), (2, 1)]).unwrap();
        let s = learn_skeleton_with(&DSeparationOracle::new(dag), &["X", "Z", "Y"], &LearnConfig::default(), &PriorKnowledge::default())
            .unwrap();
        let g = orient_v_structures(&s);
        assert_eq!(g.mark(0, 1), Some(Mark::Arrow));
        assert_eq!(g.mark(2, 1), Some(Mark::Arrow));
        assert_eq!(g.mark(1, 0), Some(Mark::Circle));
    }

    #[test]
    fn triangle_is_left_alone() {
        let s = SkeletonResult { graph: MixedGraph::complete(&["a", "b", "c"]).unwrap(), sepsets: SepSetStore::default(), tests_run: 0 };
        assert_eq!(orient_v_structures(&s), s.graph);
    }

    #[test]
    fn rule1_propagates_away_from_arrowhead() {
        let mut g = MixedGraph::new(&["a", "b", "c"]).unwrap();
        g.add_edge(0, 1, Mark::Circle, Mark::Arrow);
        g.add_edge(1, 2, Mark::Circle, Mark::Circle);
        let out = apply_orientation_rules(&g, &SepSetStore::default());
        assert!(out.is_directed(1, 2));
        assert_eq!(out.mark(1, 0), Some(Mark::Circle));
    }

    #[test]
    fn rule2_adds_arrowhead_along_directed_path() {
        let mut g = MixedGraph::new(&["a", "b", "c"]).unwrap();
        g.add_directed(0, 1);
        g.add_edge(1, 2, Mark::Circle, Mark::Arrow);
        g.add_edge(0, 2, Mark::Circle, Mark::Circle);
        let out = apply_orientation_rules(&g, &SepSetStore::default());
        assert_eq!(out.mark(0, 2), Some(Mark::Arrow));
    }

    #[test]
    fn rule3_orients_into_collider_apex() {
        // a *→ b ←* c, a o-o d o-o c, d o-o b
        let mut g = MixedGraph::new(&["a", "b", "c", "d"]).unwrap();
        g.add_edge(0, 1, Mark::Arrow, Mark::Arrow);
        g.add_edge(2, 1, Mark::Arrow, Mark::Arrow);
        g.add_edge(0, 3, Mark::Circle, Mark::Circle);
        g.add_edge(2, 3, Mark::Circle, Mark::Circle);
        g.add_edge(3, 1, Mark::Circle, Mark::Circle);
        let out = apply_orientation_rules(&g, &SepSetStore::default());
        assert_eq!(out.mark(3, 1), Some(Mark::Arrow));
    }

    #[test]
    fn rule4_uses_sepset_of_path_endpoint() {
        // d *→ a ↔ b o-o c with a → c, d not adjacent to c
        let build = || {
            let mut g = MixedGraph::new(&["d", "a", "b", "c"]).unwrap();
            g.add_edge(0, 1, Mark::Circle, Mark::Arrow);
            g.add_edge(1, 2, Mark::Arrow, Mark::Arrow);
            g.add_directed(1, 3);
            g.add_edge(2, 3, Mark::Circle, Mark::Circle);
            g
        };
        let mut sep = SepSetStore::default();
        sep.insert(0, 3, vec![1, 2], false);
        let out = rule4_only(build(), &sep);
        assert!(out.is_directed(2, 3));
        let mut sep = SepSetStore::default();
        sep.insert(0, 3, vec![1], false);
        let out = rule4_only(build(), &sep);
        assert_eq!(out.mark(3, 2), Some(Mark::Arrow));
        assert_eq!(out.mark(2, 3), Some(Mark::Arrow));
    }

    fn rule4_only(mut g: MixedGraph, sep: &SepSetStore) -> MixedGraph {
        rule4(&mut g, sep);
        g
    }

    #[test]
    fn fully_oriented_graph_is_a_fixpoint() {
        let g = MixedGraph::from_directed(&["a", "b", "c"], &[(0, 1), (2, 1), (0, 2)]).unwrap();
        assert_eq!(apply_orientation_rules(&g, &SepSetStore::default()), g);
    }

    #[test]
    fn disabled_pdsep_is_identity() {
        let oracle = DSeparationOracle::new(chain());
        let names = ["X", "Z", "Y"];
        let cfg = LearnConfig { do_possible_dsep: false, ..Default::default() };
        let s = learn_skeleton_with(&oracle, &names, &cfg, &PriorKnowledge::default()).unwrap();
        let g = orient_v_structures(&s);
        let out = possible_dsep_prune(&g, &s.sepsets, &oracle, &names, &cfg, &PriorKnowledge::default()).unwrap();
        assert_eq!(out.graph, g);
        assert!(out.removed.is_empty());
    }

    #[test]
    fn latent_confounder_leaves_bidirected_edge() {
        // X ← L → Y, X → S ← Y; L latent
        let dag = MixedGraph::from_directed(&["X", "L", "Y", "S"], &[(1, 0), (1, 2), (0, 3), (2, 3)]).unwrap();
        let oracle = DSeparationOracle::with_latents(dag, vec![0, 2, 3]);
        let r = learn_structure_with(&oracle, &oracle.observed_names(), &LearnConfig::default(), &PriorKnowledge::default()).unwrap();
        assert_eq!(r.graph.n_edges(), 3);
    }

    #[test]
    fn bad_alpha_is_rejected() {
        let oracle = DSeparationOracle::new(chain());
        let cfg = LearnConfig { alpha: 1.5, ..Default::default() };
        assert!(matches!(
            learn_skeleton_with(&oracle, &["X", "Z", "Y"], &cfg, &PriorKnowledge::default()),
            Err(LearnError::InvalidConfig(_))
        ));
    }
}
