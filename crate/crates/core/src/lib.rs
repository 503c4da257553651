//! Causal triage: constraint-based structure learning, local effect estimation and
//! interpretable classification for tabular clinical data.

pub mod data;
pub mod effects;
pub mod graph;
pub mod learn;
pub mod pipeline;
pub mod stats;
pub mod synth;
pub mod tree;
