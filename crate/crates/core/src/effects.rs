//! Causal effect estimation by parent-set adjustment over locally valid DAG extensions.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{standardize, DataError, DatasetView, StandardizedMatrix};
use crate::graph::{GraphError, Mark, MixedGraph};
use crate::stats::{ols, StatsError};

#[derive(Error, Debug)]
pub enum EffectError {
    #[error("`{0}` and `{1}` are not adjacent")]
    NotAdjacent(String, String),
    #[error("variable `{0}` is not in the data")]
    MissingVariable(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectEstimate {
    pub source: String,
    pub target: String,
    pub parent_sets: Vec<Vec<String>>,
    pub per_dag_effects: Vec<f64>,
    pub mean_effect: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Distinct locally valid parent sets of `x`.
///
/// Neighbors with an arrowhead at `x` are always parents. Neighbors joined to `x`
/// by a circle at `x` and no arrowhead at their own end may or may not be parents.
/// A choice is kept when every chosen optional parent is adjacent to every other
/// parent, so no new collider appears at `x`.
pub fn enumerate_parent_sets(g: &MixedGraph, x: usize) -> Vec<BTreeSet<usize>> {
    let mut definite = BTreeSet::new();
    let mut optional = Vec::new();
    for w in g.neighbors(x) {
        match (g.mark(w, x), g.mark(x, w)) {
            (Some(Mark::Arrow), _) => {
                definite.insert(w);
            }
            (Some(Mark::Circle), Some(m)) if m != Mark::Arrow => optional.push(w),
            _ => {}
        }
    }
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << optional.len()) {
        let chosen: Vec<usize> = (0..optional.len()).filter(|i| mask >> i & 1 == 1).map(|i| optional[i]).collect();
        let valid = chosen.iter().enumerate().all(|(i, &s)| {
            chosen[i + 1..].iter().all(|&t| g.is_adjacent(s, t)) && definite.iter().all(|&p| g.is_adjacent(s, p))
        });
        if valid {
            let mut set = definite.clone();
            set.extend(chosen);
            out.push(set);
        }
    }
    out.sort();
    out.dedup();
    out
}

fn position(m: &StandardizedMatrix, name: &str) -> Result<usize, EffectError> {
    m.position(name).ok_or_else(|| EffectError::MissingVariable(name.to_string()))
}

/// Effect of a unit change in `x` on `y`, on already standardized data.
pub fn estimate_effect_standardized(
    m: &StandardizedMatrix,
    g: &MixedGraph,
    x: &str,
    y: &str,
) -> Result<EffectEstimate, EffectError> {
    let (xi, yi) = (g.index(x)?, g.index(y)?);
    if !g.is_adjacent(xi, yi) {
        return Err(EffectError::NotAdjacent(x.to_string(), y.to_string()));
    }
    let mut warnings = Vec::new();
    for w in g.neighbors(xi) {
        if g.mark(w, xi) == Some(Mark::Arrow) && g.mark(xi, w) == Some(Mark::Arrow) {
            let msg = format!("bidirected edge {} <-> {}: parent adjustment may be biased", x, g.name(w));
            log::debug!("{msg}");
            warnings.push(msg);
        }
    }
    let (mx, my) = (position(m, x)?, position(m, y)?);
    let yv: DVector<f64> = m.column(my).into_owned();
    let mut parent_sets = Vec::new();
    let mut effects = Vec::new();
    for set in enumerate_parent_sets(g, xi) {
        let names: Vec<String> = set.iter().map(|&p| g.name(p).to_string()).collect();
        let effect = if set.contains(&yi) {
            0.0
        } else {
            let mut cols = vec![mx];
            for n in &names {
                cols.push(position(m, n)?);
            }
            let design = DMatrix::from_fn(m.n_rows(), cols.len(), |r, c| m.data[(r, cols[c])]);
            ols(&yv, &design)?[1]
        };
        parent_sets.push(names);
        effects.push(effect);
    }
    let mean_effect = if effects.iter().all(|&e| e == effects[0]) {
        effects[0]
    } else {
        effects.iter().sum::<f64>() / effects.len() as f64
    };
    Ok(EffectEstimate {
        source: x.to_string(),
        target: y.to_string(),
        parent_sets,
        per_dag_effects: effects,
        mean_effect,
        warnings,
    })
}

/// Standardizes the (complete) view, then estimates the effect of `x` on `y`.
pub fn estimate_effect(v: &DatasetView<'_>, g: &MixedGraph, x: &str, y: &str) -> Result<EffectEstimate, EffectError> {
    estimate_effect_standardized(&standardize(v)?, g, x, y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEffect {
    pub u: String,
    pub v: String,
    pub forward: EffectEstimate,
    pub backward: EffectEstimate,
    /// Strength drawn on the edge.
    pub displayed: f64,
    pub sign: i8,
}

/// Sets every edge's strength. Edges touching `outcome` show the feature-to-outcome
/// effect; other edges show whichever direction has the larger magnitude.
pub fn annotate_strengths(
    v: &DatasetView<'_>,
    g: &MixedGraph,
    outcome: Option<&str>,
) -> Result<(MixedGraph, Vec<EdgeEffect>), EffectError> {
    let m = standardize(v)?;
    let edges = g.edges();
    let records: Vec<EdgeEffect> = edges
        .par_iter()
        .map(|e| {
            let (u, w) = (g.name(e.u), g.name(e.v));
            let forward = estimate_effect_standardized(&m, g, u, w)?;
            let backward = estimate_effect_standardized(&m, g, w, u)?;
            let displayed = if outcome == Some(w) {
                forward.mean_effect
            } else if outcome == Some(u) {
                backward.mean_effect
            } else if backward.mean_effect.abs() > forward.mean_effect.abs() {
                backward.mean_effect
            } else {
                forward.mean_effect
            };
            let sign = if displayed > 0.0 {
                1
            } else if displayed < 0.0 {
                -1
            } else {
                0
            };
            Ok(EdgeEffect { u: u.to_string(), v: w.to_string(), forward, backward, displayed, sign })
        })
        .collect::<Result<_, EffectError>>()?;
    let mut out = g.clone();
    for (e, r) in edges.iter().zip(&records) {
        out.set_strength(e.u, e.v, Some(r.displayed));
    }
    Ok((out, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ColumnSchema, Dataset};

    #[test]
    fn two_arrowheads_give_one_parent_set() {
        let g = MixedGraph::from_directed(&["a", "x", "b"], &[(0, 1), (2, 1)]).unwrap();
        assert_eq!(enumerate_parent_sets(&g, 1), vec![BTreeSet::from([0, 2])]);
    }

    #[test]
    fn single_circle_edge_gives_two_sets() {
        let g = MixedGraph::complete(&["x", "y"]).unwrap();
        assert_eq!(enumerate_parent_sets(&g, 0), vec![BTreeSet::new(), BTreeSet::from([1])]);
    }

    #[test]
    fn nonadjacent_optional_parents_are_not_chosen_together() {
        let mut g = MixedGraph::new(&["a", "x", "b"]).unwrap();
        g.add_edge(0, 1, Mark::Circle, Mark::Circle);
        g.add_edge(1, 2, Mark::Circle, Mark::Circle);
        let sets = enumerate_parent_sets(&g, 1);
        assert_eq!(sets, vec![BTreeSet::new(), BTreeSet::from([0]), BTreeSet::from([2])]);
    }

    fn linear_data(n: usize) -> Dataset {
        let x: Vec<Option<f64>> = (0..n).map(|i| Some(((i * 37) % 101) as f64)).collect();
        let y: Vec<Option<f64>> = (0..n).map(|i| Some(2.0 * x[i].unwrap() + ((i * 13) % 7) as f64)).collect();
        Dataset::new(vec![ColumnSchema::continuous("x", "c"), ColumnSchema::continuous("y", "c")], vec![x, y]).unwrap()
    }

    #[test]
    fn positive_coefficient_gives_positive_strength() {
        let d = linear_data(300);
        let mut g = MixedGraph::new(&["x", "y"]).unwrap();
        g.add_directed(0, 1);
        let (out, recs) = annotate_strengths(&d.view_all(), &g, None).unwrap();
        assert!(out.strength(0, 1).unwrap() > 0.9);
        assert_eq!(recs[0].forward.per_dag_effects.len(), 1);
    }

    #[test]
    fn not_adjacent_is_an_error() {
        let d = linear_data(50);
        let g = MixedGraph::new(&["x", "y"]).unwrap();
        assert!(matches!(estimate_effect(&d.view_all(), &g, "x", "y"), Err(EffectError::NotAdjacent(..))));
    }

    #[test]
    fn descendant_in_parent_set_gives_zero() {
        let d = linear_data(100);
        let mut g = MixedGraph::new(&["x", "y"]).unwrap();
        g.add_directed(1, 0);
        let e = estimate_effect(&d.view_all(), &g, "x", "y").unwrap();
        assert_eq!(e.per_dag_effects, vec![0.0]);
    }
}
