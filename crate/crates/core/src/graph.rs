//! Mixed graphs with partial-ancestral edge marks, separating sets and prior knowledge.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum GraphError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("graph has a directed cycle")]
    CyclicGraph,
    #[error("graphs are over different node sets")]
    NodeMismatch,
    #[error("pair ({0}, {1}) is both forbidden and required")]
    ConflictingKnowledge(String, String),
    #[error("cannot parse graph: {0}")]
    Parse(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Edge-end mark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mark {
    Circle,
    Arrow,
    Tail,
}

impl Mark {
    fn dot_shape(self) -> &'static str {
        match self {
            Mark::Circle => "odot",
            Mark::Arrow => "normal",
            Mark::Tail => "none",
        }
    }

    fn from_dot_shape(s: &str) -> Option<Mark> {
        match s {
            "odot" => Some(Mark::Circle),
            "normal" => Some(Mark::Arrow),
            "none" => Some(Mark::Tail),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub mark_u: Mark,
    pub mark_v: Mark,
    pub strength: Option<f64>,
}

/// Graph over named variables; at most one edge per unordered pair, each end carrying a [`Mark`].
#[derive(Debug, Clone, PartialEq)]
pub struct MixedGraph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    // marks[u * n + v]: mark at v on the edge u–v
    marks: Vec<Option<Mark>>,
    strengths: Vec<Option<f64>>,
}

impl MixedGraph {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self, GraphError> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(GraphError::DuplicateNode(n.clone()));
            }
        }
        let n = names.len();
        Ok(Self { names, index, marks: vec![None; n * n], strengths: vec![None; n * n] })
    }

    /// Fully directed graph from `(parent, child)` index pairs.
    pub fn from_directed<S: AsRef<str>>(names: &[S], edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::new(names)?;
        for &(u, v) in edges {
            g.add_directed(u, v);
        }
        Ok(g)
    }

    /// Complete graph with circle marks everywhere.
    pub fn complete<S: AsRef<str>>(names: &[S]) -> Result<Self, GraphError> {
        let mut g = Self::new(names)?;
        for u in 0..g.n() {
            for v in u + 1..g.n() {
                g.add_edge(u, v, Mark::Circle, Mark::Circle);
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index(&self, name: &str) -> Result<usize, GraphError> {
        self.index.get(name).copied().ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    fn at(&self, u: usize, v: usize) -> usize {
        u * self.n() + v
    }

    pub fn add_edge(&mut self, u: usize, v: usize, mark_u: Mark, mark_v: Mark) {
        assert_ne!(u, v, "self-loop on {}", self.names[u]);
        let (uv, vu) = (self.at(u, v), self.at(v, u));
        self.marks[uv] = Some(mark_v);
        self.marks[vu] = Some(mark_u);
    }

    /// Adds `u → v`.
    pub fn add_directed(&mut self, u: usize, v: usize) {
        self.add_edge(u, v, Mark::Tail, Mark::Arrow);
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        let (uv, vu) = (self.at(u, v), self.at(v, u));
        self.marks[uv] = None;
        self.marks[vu] = None;
        self.strengths[uv] = None;
        self.strengths[vu] = None;
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.marks[self.at(u, v)].is_some()
    }

    /// Mark at `v` on the edge `u`–`v`.
    pub fn mark(&self, u: usize, v: usize) -> Option<Mark> {
        self.marks[self.at(u, v)]
    }

    /// Sets the mark at `v` on an existing edge `u`–`v`.
    pub fn set_mark(&mut self, u: usize, v: usize, m: Mark) {
        let i = self.at(u, v);
        debug_assert!(self.marks[i].is_some(), "no edge {}–{}", self.names[u], self.names[v]);
        self.marks[i] = Some(m);
    }

    /// `u → v`: tail at `u`, arrowhead at `v`.
    pub fn is_directed(&self, u: usize, v: usize) -> bool {
        self.mark(u, v) == Some(Mark::Arrow) && self.mark(v, u) == Some(Mark::Tail)
    }

    pub fn strength(&self, u: usize, v: usize) -> Option<f64> {
        self.strengths[self.at(u, v)]
    }

    pub fn set_strength(&mut self, u: usize, v: usize, s: Option<f64>) {
        let (uv, vu) = (self.at(u, v), self.at(v, u));
        self.strengths[uv] = s;
        self.strengths[vu] = s;
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.n()).filter(|&u| self.is_adjacent(v, u)).collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        (0..self.n()).filter(|&u| self.is_adjacent(v, u)).count()
    }

    pub fn parents(&self, v: usize) -> Vec<usize> {
        (0..self.n()).filter(|&u| self.is_directed(u, v)).collect()
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        (0..self.n()).filter(|&u| self.is_directed(v, u)).collect()
    }

    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for u in 0..self.n() {
            for v in u + 1..self.n() {
                if let (Some(mu), Some(mv)) = (self.mark(v, u), self.mark(u, v)) {
                    out.push(Edge { u, v, mark_u: mu, mark_v: mv, strength: self.strength(u, v) });
                }
            }
        }
        out
    }

    pub fn n_edges(&self) -> usize {
        self.marks.iter().filter(|m| m.is_some()).count() / 2
    }

    /// Unordered adjacent pairs `(u, v)` with `u < v`.
    pub fn skeleton(&self) -> BTreeSet<(usize, usize)> {
        self.edges().into_iter().map(|e| (e.u, e.v)).collect()
    }

    /// Same adjacencies, every mark reset to circle.
    pub fn circle_skeleton(&self) -> MixedGraph {
        let mut g = self.clone();
        for m in g.marks.iter_mut().flatten() {
            *m = Mark::Circle;
        }
        g
    }

    /// Topological order of the fully directed graph.
    pub fn topological_order(&self) -> Result<Vec<usize>, GraphError> {
        let n = self.n();
        if self.edges().iter().any(|e| !(self.is_directed(e.u, e.v) || self.is_directed(e.v, e.u))) {
            return Err(GraphError::Parse("graph is not fully directed".into()));
        }
        let mut indeg: Vec<usize> = (0..n).map(|v| self.parents(v).len()).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for c in self.children(u) {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err(GraphError::CyclicGraph)
        }
    }

    /// Whether the fully directed edges (tail–arrow) contain a cycle.
    pub fn has_directed_cycle(&self) -> bool {
        let n = self.n();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; n];
        fn visit(g: &MixedGraph, u: usize, state: &mut [u8]) -> bool {
            state[u] = 1;
            for c in g.children(u) {
                if state[c] == 1 || (state[c] == 0 && visit(g, c, state)) {
                    return true;
                }
            }
            state[u] = 2;
            false
        }
        (0..n).any(|u| state[u] == 0 && visit(self, u, &mut state))
    }

    /// Every node at undirected path distance ≤ `k` from `v`, excluding `v`.
    pub fn neighbors_within(&self, v: usize, k: usize) -> BTreeSet<usize> {
        let mut dist = vec![usize::MAX; self.n()];
        dist[v] = 0;
        let mut queue = VecDeque::from([v]);
        let mut out = BTreeSet::new();
        while let Some(u) = queue.pop_front() {
            if dist[u] == k {
                continue;
            }
            for w in self.neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    out.insert(w);
                    queue.push_back(w);
                }
            }
        }
        out
    }

    /// Name-based [`neighbors_within`](Self::neighbors_within).
    pub fn neighbors_within_named(&self, v: &str, k: usize) -> Result<BTreeSet<String>, GraphError> {
        let i = self.index(v)?;
        Ok(self.neighbors_within(i, k).into_iter().map(|j| self.names[j].clone()).collect())
    }

    /// Subgraph induced by the named nodes, in the given order.
    pub fn induced<S: AsRef<str>>(&self, nodes: &[S]) -> Result<MixedGraph, GraphError> {
        let idx: Vec<usize> = nodes.iter().map(|n| self.index(n.as_ref())).collect::<Result<_, _>>()?;
        let mut g = MixedGraph::new(nodes)?;
        for (a, &u) in idx.iter().enumerate() {
            for (b, &v) in idx.iter().enumerate().skip(a + 1) {
                if let (Some(mu), Some(mv)) = (self.mark(v, u), self.mark(u, v)) {
                    g.add_edge(a, b, mu, mv);
                    g.set_strength(a, b, self.strength(u, v));
                }
            }
        }
        Ok(g)
    }

    pub fn to_dump(&self) -> GraphDump {
        GraphDump {
            nodes: self.names.clone(),
            edges: self
                .edges()
                .into_iter()
                .map(|e| EdgeRecord {
                    from: self.names[e.u].clone(),
                    to: self.names[e.v].clone(),
                    mark_from: e.mark_u,
                    mark_to: e.mark_v,
                    strength: e.strength,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_dump()).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let dump: GraphDump = serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
        dump.into_graph()
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// GraphViz rendering. Pen width scales with |strength| relative to the
    /// largest |strength| in this graph; red for positive, blue for negative,
    /// gray when unknown.
    pub fn to_dot(&self, style: &StyleConfig) -> String {
        let max_abs = self
            .edges()
            .iter()
            .filter_map(|e| e.strength.map(f64::abs))
            .fold(0.0, f64::max);
        let mut out = String::new();
        let (kind, arrow) = if style.undirected { ("graph", "--") } else { ("digraph", "->") };
        let _ = writeln!(out, "{kind} \"{}\" {{", escape(&style.title));
        let _ = writeln!(out, "  node [shape=ellipse];");
        for name in &self.names {
            if style.highlight.as_deref() == Some(name.as_str()) {
                let _ = writeln!(out, "  \"{}\" [style=filled, fillcolor=\"gold\"];", escape(name));
            } else {
                let _ = writeln!(out, "  \"{}\";", escape(name));
            }
        }
        for e in self.edges() {
            let (color, width) = match e.strength {
                Some(s) if s != 0.0 && max_abs > 0.0 => (
                    if s > 0.0 { "red" } else { "blue" },
                    style.base_penwidth + (style.max_penwidth - style.base_penwidth) * s.abs() / max_abs,
                ),
                _ => ("gray", style.base_penwidth),
            };
            let mut attrs = format!("color=\"{color}\", penwidth={width:.3}");
            if !style.undirected {
                let _ = write!(
                    attrs,
                    ", dir=both, arrowtail={}, arrowhead={}",
                    e.mark_u.dot_shape(),
                    e.mark_v.dot_shape()
                );
            }
            if let Some(s) = e.strength.filter(|_| style.show_strength) {
                let _ = write!(attrs, ", label=\"{s:.2}\"");
            }
            let _ = writeln!(
                out,
                "  \"{}\" {arrow} \"{}\" [{attrs}];",
                escape(&self.names[e.u]),
                escape(&self.names[e.v])
            );
        }
        out.push_str("}\n");
        out
    }

    /// Parses the DOT subset produced by [`to_dot`](Self::to_dot).
    ///
    /// Edges without arrow attributes (undirected rendering) come back with circle marks.
    /// Strengths are not recovered.
    pub fn from_dot(text: &str) -> Result<Self, GraphError> {
        let mut names: Vec<String> = Vec::new();
        let mut edges: Vec<(String, String, Mark, Mark)> = Vec::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with("graph ") || line.starts_with("digraph ") || line == "}" || line.starts_with("node ") {
                continue;
            }
            let (first, rest) = take_quoted(line).ok_or_else(|| GraphError::Parse(format!("bad line `{line}`")))?;
            let rest = rest.trim_start();
            if let Some(after) = rest.strip_prefix("->").or_else(|| rest.strip_prefix("--")) {
                let (second, attrs) =
                    take_quoted(after.trim_start()).ok_or_else(|| GraphError::Parse(format!("bad edge `{line}`")))?;
                let attr = |key: &str| -> Option<Mark> {
                    let pos = attrs.find(&format!("{key}="))?;
                    let tail = &attrs[pos + key.len() + 1..];
                    let end = tail.find([',', ']']).unwrap_or(tail.len());
                    Mark::from_dot_shape(tail[..end].trim())
                };
                let mu = attr("arrowtail").unwrap_or(Mark::Circle);
                let mv = attr("arrowhead").unwrap_or(Mark::Circle);
                edges.push((first, second, mu, mv));
            } else if !names.contains(&first) {
                names.push(first);
            }
        }
        let mut g = MixedGraph::new(&names)?;
        for (a, b, mu, mv) in edges {
            let (u, v) = (g.index(&a)?, g.index(&b)?);
            if u == v {
                return Err(GraphError::SelfLoop(a));
            }
            g.add_edge(u, v, mu, mv);
        }
        Ok(g)
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn take_quoted(s: &str) -> Option<(String, &str)> {
    let s = s.strip_prefix('"')?;
    let mut out = String::new();
    let mut chars = s.char_indices();
    while let Some((i, c)) = chars.next() {
        match c {
            '\\' => out.push(chars.next()?.1),
            '"' => return Some((out, &s[i + 1..])),
            _ => out.push(c),
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleConfig {
    pub title: String,
    pub base_penwidth: f64,
    pub max_penwidth: f64,
    /// Drop edge marks and render plain undirected edges.
    pub undirected: bool,
    pub show_strength: bool,
    /// Node drawn filled (typically the outcome).
    pub highlight: Option<String>,
}

impl Default for StyleConfig {
    fn default() -> Self {
        Self {
            title: "G".into(),
            base_penwidth: 1.0,
            max_penwidth: 6.0,
            undirected: false,
            show_strength: true,
            highlight: None,
        }
    }
}

/// Machine-readable graph dump; also the on-disk format for DAG files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDump {
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub from: String,
    pub to: String,
    #[serde(default = "tail")]
    pub mark_from: Mark,
    #[serde(default = "arrow")]
    pub mark_to: Mark,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
}

fn tail() -> Mark {
    Mark::Tail
}

fn arrow() -> Mark {
    Mark::Arrow
}

impl GraphDump {
    pub fn into_graph(self) -> Result<MixedGraph, GraphError> {
        let mut g = MixedGraph::new(&self.nodes)?;
        for e in self.edges {
            let (u, v) = (g.index(&e.from)?, g.index(&e.to)?);
            if u == v {
                return Err(GraphError::SelfLoop(e.from));
            }
            g.add_edge(u, v, e.mark_from, e.mark_to);
            g.set_strength(u, v, e.strength);
        }
        Ok(g)
    }
}

fn pair(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SepSet {
    pub set: Vec<usize>,
    /// Removed by prior knowledge rather than by a test.
    pub by_knowledge: bool,
}

/// Conditioning sets that separated each removed pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SepSetStore {
    sets: BTreeMap<(usize, usize), SepSet>,
}

impl SepSetStore {
    pub fn insert(&mut self, u: usize, v: usize, set: Vec<usize>, by_knowledge: bool) {
        self.sets.insert(pair(u, v), SepSet { set, by_knowledge });
    }

    pub fn get(&self, u: usize, v: usize) -> Option<&SepSet> {
        self.sets.get(&pair(u, v))
    }

    /// Whether `z` separated `u` and `v`. `None` when the pair has no test-derived sepset.
    pub fn contains(&self, u: usize, v: usize, z: usize) -> Option<bool> {
        self.get(u, v).filter(|s| !s.by_knowledge).map(|s| s.set.contains(&z))
    }

    pub fn remove(&mut self, u: usize, v: usize) {
        self.sets.remove(&pair(u, v));
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &SepSet)> {
        self.sets.iter()
    }
}

/// Background knowledge by variable name.
///
/// The TOML file form is
/// ```toml
/// forbidden = [["SEX", "COPD"]]          # never adjacent
/// forbidden_directed = [["OUTCOME", "AGE"]] # OUTCOME is not a cause of AGE
/// required = [["BUN", "CREATININE"]]     # always adjacent
/// ```
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorKnowledge {
    #[serde(default)]
    pub forbidden: BTreeSet<(String, String)>,
    #[serde(default)]
    pub forbidden_directed: BTreeSet<(String, String)>,
    #[serde(default)]
    pub required: BTreeSet<(String, String)>,
}

fn unordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl PriorKnowledge {
    pub fn forbid(&mut self, a: &str, b: &str) {
        self.forbidden.insert(unordered(a, b));
    }

    pub fn require(&mut self, a: &str, b: &str) {
        self.required.insert(unordered(a, b));
    }

    /// `cause` may not be an ancestor of `effect`.
    pub fn forbid_directed(&mut self, cause: &str, effect: &str) {
        self.forbidden_directed.insert((cause.to_string(), effect.to_string()));
    }

    pub fn from_toml_str(text: &str) -> Result<Self, GraphError> {
        let raw: PriorKnowledge = toml::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
        let mut pk = PriorKnowledge { forbidden_directed: raw.forbidden_directed, ..Default::default() };
        for (a, b) in &raw.forbidden {
            pk.forbid(a, b);
        }
        for (a, b) in &raw.required {
            pk.require(a, b);
        }
        if let Some((a, b)) = pk.forbidden.intersection(&pk.required).next() {
            return Err(GraphError::ConflictingKnowledge(a.clone(), b.clone()));
        }
        Ok(pk)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("knowledge serializes")
    }

    /// Fails on the first name not in `names`.
    pub fn validate<S: AsRef<str>>(&self, names: &[S]) -> Result<(), GraphError> {
        let known: BTreeSet<&str> = names.iter().map(|s| s.as_ref()).collect();
        let all = self.forbidden.iter().chain(&self.forbidden_directed).chain(&self.required);
        for (a, b) in all {
            for n in [a, b] {
                if !known.contains(n.as_str()) {
                    return Err(GraphError::UnknownNode(n.clone()));
                }
            }
        }
        if let Some((a, b)) = self.forbidden.intersection(&self.required).next() {
            return Err(GraphError::ConflictingKnowledge(a.clone(), b.clone()));
        }
        Ok(())
    }

    /// Copy keeping only pairs whose both variables are in `names`.
    pub fn restrict<S: AsRef<str>>(&self, names: &[S]) -> Self {
        let known: BTreeSet<&str> = names.iter().map(|s| s.as_ref()).collect();
        let keep = |set: &BTreeSet<(String, String)>| -> BTreeSet<(String, String)> {
            set.iter().filter(|(a, b)| known.contains(a.as_str()) && known.contains(b.as_str())).cloned().collect()
        };
        Self { forbidden: keep(&self.forbidden), forbidden_directed: keep(&self.forbidden_directed), required: keep(&self.required) }
    }

    /// Index form over a variable list; pairs naming absent variables are dropped.
    pub fn resolve<S: AsRef<str>>(&self, names: &[S]) -> ResolvedKnowledge {
        let pos: HashMap<&str, usize> = names.iter().enumerate().map(|(i, s)| (s.as_ref(), i)).collect();
        let lookup = |set: &BTreeSet<(String, String)>, ordered: bool| -> BTreeSet<(usize, usize)> {
            set.iter()
                .filter_map(|(a, b)| Some((*pos.get(a.as_str())?, *pos.get(b.as_str())?)))
                .filter(|(u, v)| u != v)
                .map(|(u, v)| if ordered { (u, v) } else { pair(u, v) })
                .collect()
        };
        ResolvedKnowledge {
            forbidden: lookup(&self.forbidden, false),
            forbidden_directed: lookup(&self.forbidden_directed, true),
            required: lookup(&self.required, false),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResolvedKnowledge {
    pub forbidden: BTreeSet<(usize, usize)>,
    pub forbidden_directed: BTreeSet<(usize, usize)>,
    pub required: BTreeSet<(usize, usize)>,
}

impl ResolvedKnowledge {
    pub fn is_forbidden(&self, u: usize, v: usize) -> bool {
        self.forbidden.contains(&pair(u, v))
    }

    pub fn is_required(&self, u: usize, v: usize) -> bool {
        self.required.contains(&pair(u, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_abc() -> MixedGraph {
        let mut g = MixedGraph::new(&["A", "B", "C"]).unwrap();
        g.add_edge(0, 1, Mark::Circle, Mark::Circle);
        g.add_edge(1, 2, Mark::Circle, Mark::Circle);
        g
    }

    #[test]
    fn neighbors_within_on_a_path() {
        let g = path_abc();
        assert_eq!(g.neighbors_within(0, 1), BTreeSet::from([1]));
        assert_eq!(g.neighbors_within(0, 2), BTreeSet::from([1, 2]));
        assert!(matches!(g.neighbors_within_named("Z", 1), Err(GraphError::UnknownNode(_))));
    }

    #[test]
    fn marks_are_per_end() {
        let mut g = MixedGraph::new(&["a", "b"]).unwrap();
        g.add_directed(0, 1);
        assert!(g.is_directed(0, 1));
        assert!(!g.is_directed(1, 0));
        assert_eq!(g.mark(0, 1), Some(Mark::Arrow));
        assert_eq!(g.mark(1, 0), Some(Mark::Tail));
        assert_eq!(g.parents(1), vec![0]);
    }

    #[test]
    fn positive_edge_is_red_and_thick() {
        let mut g = MixedGraph::new(&["a", "b"]).unwrap();
        g.add_edge(0, 1, Mark::Circle, Mark::Circle);
        g.set_strength(0, 1, Some(0.5));
        let dot = g.to_dot(&StyleConfig::default());
        let line = dot.lines().find(|l| l.contains("->")).unwrap();
        assert!(line.contains("color=\"red\""));
        assert!(line.contains("penwidth=6.000"));
    }

    #[test]
    fn empty_graph_dot_lists_nodes() {
        let g = MixedGraph::new(&["x", "y"]).unwrap();
        let dot = g.to_dot(&StyleConfig::default());
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("\"x\";") && dot.contains("\"y\";"));
        assert!(dot.trim_end().ends_with('}'));
    }

    #[test]
    fn negative_age_edge_is_blue_and_thickest() {
        let mut g = MixedGraph::new(&["AGE", "OUTCOME", "PF", "BUN"]).unwrap();
        for (u, v, s) in [(0, 1, -0.46), (2, 1, 0.30), (3, 1, -0.21)] {
            g.add_edge(u, v, Mark::Circle, Mark::Circle);
            g.set_strength(u, v, Some(s));
        }
        let dot = g.to_dot(&StyleConfig { undirected: true, ..Default::default() });
        let width = |l: &str| -> f64 {
            let p = l.find("penwidth=").unwrap() + 9;
            l[p..].split(|c| c == ',' || c == ']').next().unwrap().parse().unwrap()
        };
        let edge_lines: Vec<&str> = dot.lines().filter(|l| l.contains("--")).collect();
        let age = edge_lines.iter().find(|l| l.contains("\"AGE\"")).unwrap();
        assert!(age.contains("color=\"blue\""));
        assert!(edge_lines.iter().all(|l| width(l) <= width(age)));
    }

    #[test]
    fn unknown_edge_strength_is_gray() {
        let g = path_abc();
        assert!(g.to_dot(&StyleConfig::default()).contains("gray"));
    }

    #[test]
    fn dot_round_trip_keeps_structure() {
        let mut g = MixedGraph::new(&["a \"quoted\"", "b", "c", "d"]).unwrap();
        g.add_edge(0, 1, Mark::Circle, Mark::Arrow);
        g.add_edge(1, 2, Mark::Tail, Mark::Arrow);
        g.add_edge(2, 3, Mark::Arrow, Mark::Arrow);
        let back = MixedGraph::from_dot(&g.to_dot(&StyleConfig::default())).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn json_dump_round_trip() {
        let mut g = path_abc();
        g.set_strength(0, 1, Some(-0.25));
        assert_eq!(MixedGraph::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn topological_order_detects_cycles() {
        let g = MixedGraph::from_directed(&["a", "b", "c"], &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(g.topological_order().unwrap(), vec![0, 1, 2]);
        let c = MixedGraph::from_directed(&["a", "b", "c"], &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(matches!(c.topological_order(), Err(GraphError::CyclicGraph)));
        assert!(c.has_directed_cycle());
    }

    #[test]
    fn prior_knowledge_file() {
        let pk = PriorKnowledge::from_toml_str(
            "forbidden = [[\"B\", \"A\"]]\nforbidden_directed = [[\"C\", \"A\"]]\n",
        )
        .unwrap();
        assert!(pk.forbidden.contains(&("A".to_string(), "B".to_string())));
        assert!(pk.validate(&["A", "B", "C"]).is_ok());
        assert!(matches!(pk.validate(&["A", "B"]), Err(GraphError::UnknownNode(n)) if n == "C"));
        let r = pk.resolve(&["C", "A", "B"]);
        assert!(r.is_forbidden(2, 1));
        assert!(r.forbidden_directed.contains(&(0, 1)));
        let bad = PriorKnowledge::from_toml_str("forbidden = [[\"A\", \"B\"]]\nrequired = [[\"B\", \"A\"]]\n");
        assert!(matches!(bad, Err(GraphError::ConflictingKnowledge(..))));
    }
}
