#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use causal_triage::graph::{Mark, MixedGraph};

pub fn node_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("n{i}")).collect()
}

/// Every DAG on `n` labelled nodes: each pair is absent, forward or backward.
pub fn all_dags(n: usize) -> Vec<MixedGraph> {
    let names = node_names(n);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let mut out = Vec::new();
    for code in 0..3usize.pow(pairs.len() as u32) {
        let mut c = code;
        let mut edges = Vec::new();
        for &(u, v) in &pairs {
            match c % 3 {
                1 => edges.push((u, v)),
                2 => edges.push((v, u)),
                _ => {}
            }
            c /= 3;
        }
        let g = MixedGraph::from_directed(&names, &edges).unwrap();
        if !g.has_directed_cycle() {
            out.push(g);
        }
    }
    out
}

/// Unshielded colliders `(a, c, b)` with `a < b` and `a -> c <- b`.
pub fn v_structures(g: &MixedGraph) -> BTreeSet<(usize, usize, usize)> {
    let mut out = BTreeSet::new();
    for c in 0..g.n() {
        let parents = g.parents(c);
        for (i, &a) in parents.iter().enumerate() {
            for &b in &parents[i + 1..] {
                if !g.is_adjacent(a, b) {
                    out.insert((a.min(b), c, a.max(b)));
                }
            }
        }
    }
    out
}

/// Arrowheads at colliders of a learned graph, read back as `(a, c, b)` triples.
pub fn learned_v_structures(g: &MixedGraph) -> BTreeSet<(usize, usize, usize)> {
    let mut out = BTreeSet::new();
    for c in 0..g.n() {
        let into: Vec<usize> = g.neighbors(c).into_iter().filter(|&a| g.mark(a, c) == Some(Mark::Arrow)).collect();
        for (i, &a) in into.iter().enumerate() {
            for &b in &into[i + 1..] {
                if !g.is_adjacent(a, b) {
                    out.insert((a.min(b), c, a.max(b)));
                }
            }
        }
    }
    out
}

/// Groups DAGs into Markov equivalence classes keyed by skeleton and v-structures.
pub fn equivalence_classes(dags: Vec<MixedGraph>) -> Vec<Vec<MixedGraph>> {
    let mut classes: BTreeMap<(BTreeSet<(usize, usize)>, BTreeSet<(usize, usize, usize)>), Vec<MixedGraph>> = BTreeMap::new();
    for g in dags {
        classes.entry((g.skeleton(), v_structures(&g))).or_default().push(g);
    }
    classes.into_values().collect()
}

/// Essential graph of a class: edges directed when every member agrees, circle-circle otherwise.
pub fn essential_graph(class: &[MixedGraph]) -> MixedGraph {
    let first = &class[0];
    let mut g = MixedGraph::new(first.names()).unwrap();
    for (u, v) in first.skeleton() {
        let forward = class.iter().all(|d| d.is_directed(u, v));
        let backward = class.iter().all(|d| d.is_directed(v, u));
        if forward {
            g.add_directed(u, v);
        } else if backward {
            g.add_directed(v, u);
        } else {
            g.add_edge(u, v, Mark::Circle, Mark::Circle);
        }
    }
    g
}
