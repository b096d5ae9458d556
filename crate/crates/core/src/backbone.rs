//! Disparity-filter significance scoring and backbone extraction for dense
//! weighted networks.
//!
//! Each edge weight is scored against a null model that splits a node's
//! strength uniformly at random among its edges: with k incident edges the
//! normalized weight p = w/s of one edge exceeds its null counterpart with
//! probability alpha = (1 − p)^(k−1). Small alpha marks an edge that carries
//! a disproportionate share of its endpoint's strength.

use crate::error::{Error, Result};
use crate::graph::{BinaryNetwork, ValuedNetwork};

/// Per-endpoint edge significance scores. `alpha[i][j]` is the significance
/// of edge (i, j) from i's perspective; the matrix is not symmetric before
/// the two endpoint views are combined. Zero-weight dyads score 1.0.
#[derive(Debug, Clone)]
pub struct DisparityScores {
    n: usize,
    alpha: Vec<f64>,
}

impl DisparityScores {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn alpha(&self, i: usize, j: usize) -> f64 {
        self.alpha[i * self.n + j]
    }

    /// Combined two-sided score: the edge is retained at `level` when this is
    /// below `level` (significant from at least one endpoint's perspective).
    #[inline]
    pub fn combined(&self, i: usize, j: usize) -> f64 {
        self.alpha(i, j).min(self.alpha(j, i))
    }
}

/// Scores every incident edge of every node against the uniform-splitting
/// null. Degree-1 endpoints and zero-strength nodes yield all-1 rows.
pub fn disparity_alpha(net: &ValuedNetwork) -> DisparityScores {
    let n = net.n();
    let mut alpha = vec![1.0f64; n * n];
    for i in 0..n {
        let k = net.nonzero_degree(i);
        if k < 1 {
            continue;
        }
        let s = net.strength(i).expect("index in range") as f64;
        if s <= 0.0 {
            continue;
        }
        for j in 0..n {
            let w = net.weight(i, j);
            if w == 0 {
                continue;
            }
            let p = f64::from(w) / s;
            alpha[i * n + j] = (1.0 - p).powi((k - 1) as i32);
        }
    }
    DisparityScores { n, alpha }
}

/// Binarizes a valued network keeping edges significant at `level` from at
/// least one endpoint's perspective. Zero-weight dyads are never retained.
pub fn extract_backbone(net: &ValuedNetwork, level: f64) -> Result<BinaryNetwork> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Graph(format!("significance level {level} must lie in (0, 1)")));
    }
    let scores = disparity_alpha(net);
    let mut out = BinaryNetwork::empty(std::sync::Arc::clone(net.nodes()), net.year());
    for (i, j) in net.dyads() {
        if net.weight(i, j) > 0 && scores.combined(i, j) < level {
            out.set_edge(i, j, true);
        }
    }
    Ok(out)
}

/// One row of the trimming report.
#[derive(Debug, Clone, PartialEq)]
pub struct TrimRow {
    pub level: f64,
    pub retained_edges: usize,
    pub removed_fraction: f64,
}

/// Retained-edge counts and removed fractions for a list of significance
/// levels.
pub fn trim_report(net: &ValuedNetwork, levels: &[f64]) -> Result<Vec<TrimRow>> {
    if levels.is_empty() {
        return Err(Error::Graph("trim report needs at least one level".into()));
    }
    let total = net.edge_count();
    let mut rows = Vec::with_capacity(levels.len());
    for &level in levels {
        let backbone = extract_backbone(net, level)?;
        let retained = backbone.edge_count();
        let removed_fraction = if total == 0 { 0.0 } else { 1.0 - retained as f64 / total as f64 };
        rows.push(TrimRow { level, retained_edges: retained, removed_fraction });
    }
    Ok(rows)
}
