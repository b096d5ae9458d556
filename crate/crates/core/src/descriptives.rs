//! Whole-network descriptive statistics: density, Freeman degree
//! centralization, triangle census, components/isolates, and per-country
//! democracy summaries.

use crate::error::{Error, Result};
use crate::graph::{AttributePanel, BinaryNetwork, ValuedNetwork};

/// One row of the yearly descriptives table.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSummary {
    pub year: i32,
    pub nodes: usize,
    pub isolates: usize,
    pub total_edges: usize,
    pub total_weight: u64,
    pub max_weight: u32,
    pub components: usize,
    pub density: f64,
    pub centralization: f64,
    pub closed_triads: u64,
}

/// Proportion of observed to potential ties: 2E / (n(n−1)).
pub fn density(net: &BinaryNetwork) -> Result<f64> {
    let n = net.n();
    if n < 2 {
        return Err(Error::Graph("density needs at least 2 nodes".into()));
    }
    let e = net.edge_count() as f64;
    Ok(2.0 * e / (n as f64 * (n as f64 - 1.0)))
}

/// Freeman degree centralization: Σ_i (d_max − d_i) / ((n−1)(n−2)).
pub fn degree_centralization(net: &BinaryNetwork) -> Result<f64> {
    let n = net.n();
    if n < 3 {
        return Err(Error::Graph("degree centralization needs at least 3 nodes".into()));
    }
    let degrees: Vec<usize> = (0..n).map(|i| net.adjacency().degree(i)).collect();
    let d_max = *degrees.iter().max().expect("n ≥ 3");
    let sum: usize = degrees.iter().map(|&d| d_max - d).sum();
    Ok(sum as f64 / ((n - 1) as f64 * (n - 2) as f64))
}

/// Number of node triples with all three edges present.
pub fn closed_triads(net: &BinaryNetwork) -> Result<u64> {
    let n = net.n();
    if n < 3 {
        return Err(Error::Graph("triad counts need at least 3 nodes".into()));
    }
    // Each triangle is counted once per edge.
    let mut triple: u64 = 0;
    for (i, j) in net.edges() {
        triple += net.adjacency().common_neighbors(i, j) as u64;
    }
    Ok(triple / 3)
}

/// C(n, 3): the number of possible closed triads among n nodes.
pub fn possible_triads(n: usize) -> Result<u64> {
    if n < 3 {
        return Err(Error::Graph("triad counts need at least 3 nodes".into()));
    }
    let n = n as u64;
    Ok(n * (n - 1) * (n - 2) / 6)
}

/// Connected-component count (isolates count as singleton components) and
/// isolate count.
pub fn components_and_isolates(net: &BinaryNetwork) -> (usize, usize) {
    let n = net.n();
    let mut seen = vec![false; n];
    let mut components = 0;
    let mut isolates = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        if net.adjacency().degree(start) == 0 {
            isolates += 1;
            seen[start] = true;
            continue;
        }
        stack.push(start);
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for w in net.adjacency().neighbor_ids(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    (components, isolates)
}

/// All yearly table statistics for one valued network. The unweighted
/// statistics are computed on the weight ≥ 1 binary view; total and maximum
/// weight come from the valued view.
pub fn summarize(net: &ValuedNetwork) -> Result<NetworkSummary> {
    let binary = net.binarize(1)?;
    let (components, isolates) = components_and_isolates(&binary);
    Ok(NetworkSummary {
        year: net.year(),
        nodes: net.n(),
        isolates,
        total_edges: binary.edge_count(),
        total_weight: net.total_weight(),
        max_weight: net.max_weight(),
        components,
        density: density(&binary)?,
        centralization: degree_centralization(&binary)?,
        closed_triads: closed_triads(&binary)?,
    })
}

/// Per-country mean score over the panel years and last-minus-first change.
#[derive(Debug, Clone, PartialEq)]
pub struct DemocracyRow {
    pub code: String,
    pub mean: f64,
    /// Last-year minus first-year score; `None` flags nodes where an endpoint
    /// is unavailable.
    pub diff: Option<f64>,
}

/// Time-frame mean and endpoint difference of a [0,1] score, sorted by
/// descending mean.
pub fn democracy_summary(panel: &AttributePanel, attribute: &str) -> Result<Vec<DemocracyRow>> {
    let years = panel.years();
    if years.len() < 2 {
        return Err(Error::Panel("democracy summary needs at least 2 panel years".into()));
    }
    let all = panel
        .numeric_all(attribute)
        .ok_or_else(|| Error::UnknownAttribute(attribute.into()))?;
    let n = panel.nodes().len();
    let t = years.len();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let series: Vec<f64> = (0..t).map(|y| all[y * n + i]).collect();
        let mean = series.iter().sum::<f64>() / t as f64;
        let first = series[0];
        let last = series[t - 1];
        let diff = (first.is_finite() && last.is_finite()).then(|| last - first);
        rows.push(DemocracyRow { code: panel.nodes().code(i).to_string(), mean, diff });
    }
    rows.sort_by(|a, b| b.mean.partial_cmp(&a.mean).unwrap().then(a.code.cmp(&b.code)));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{NodeSet, ValuedNetwork};
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn nodes(n: usize) -> Arc<NodeSet> {
        Arc::new(NodeSet::synthetic(n))
    }

    fn complete(n: usize) -> BinaryNetwork {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j));
            }
        }
        BinaryNetwork::from_edges(nodes(n), 0, &edges).unwrap()
    }

    fn random_graph(n: usize, p: f64, seed: u64) -> BinaryNetwork {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        BinaryNetwork::from_edges(nodes(n), 0, &edges).unwrap()
    }

    #[test]
    fn density_matches_observed_rows() {
        // 170 nodes with 5475 and 10100 edges reproduce the published densities
        let n = 170.0;
        assert_abs_diff_eq!(2.0 * 5475.0 / (n * (n - 1.0)), 0.381, epsilon = 5e-4);
        assert_abs_diff_eq!(2.0 * 10100.0 / (n * (n - 1.0)), 0.703, epsilon = 5e-4);
        assert_abs_diff_eq!(density(&complete(6)).unwrap(), 1.0, epsilon = 1e-12);
        assert!(density(&BinaryNetwork::empty(nodes(1), 0)).is_err());
    }

    #[test]
    fn centralization_extremes() {
        let star = BinaryNetwork::from_edges(nodes(5), 0, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_abs_diff_eq!(degree_centralization(&star).unwrap(), 1.0, epsilon = 1e-12);
        // regular graph: all degrees equal
        assert_abs_diff_eq!(degree_centralization(&complete(5)).unwrap(), 0.0, epsilon = 1e-12);
        // path on 3 nodes: ((2−1)+(2−2)+(2−1)) / (2·1) = 1.0
        let path = BinaryNetwork::from_edges(nodes(3), 0, &[(0, 1), (1, 2)]).unwrap();
        assert_abs_diff_eq!(degree_centralization(&path).unwrap(), 1.0, epsilon = 1e-12);
        assert!(degree_centralization(&BinaryNetwork::empty(nodes(2), 0)).is_err());
    }

    #[test]
    fn centralization_in_unit_interval_on_random_graphs() {
        for seed in 0..1000 {
            let net = random_graph(12, 0.3, seed);
            let c = degree_centralization(&net).unwrap();
            assert!((0.0..=1.0).contains(&c), "centralization {c} out of range");
        }
    }

    #[test]
    fn triad_budget() {
        assert_eq!(possible_triads(170).unwrap(), 804_440);
        assert_eq!(possible_triads(3).unwrap(), 1);
        assert!(possible_triads(2).is_err());
    }

    #[test]
    fn triangle_count_on_fixtures() {
        let triangle = BinaryNetwork::from_edges(nodes(3), 0, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(closed_triads(&triangle).unwrap(), 1);
        assert_eq!(closed_triads(&complete(6)).unwrap(), 20);
    }

    /// Brute-force triple enumeration oracle.
    fn count_triangles_brute(net: &BinaryNetwork) -> u64 {
        let n = net.n();
        let mut count = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    if net.has_edge(i, j) && net.has_edge(j, k) && net.has_edge(i, k) {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    #[test]
    fn triangles_match_brute_force_enumeration() {
        for seed in 0..50 {
            let net = random_graph(10, 0.4, 100 + seed);
            assert_eq!(closed_triads(&net).unwrap(), count_triangles_brute(&net));
        }
        // trace(A³)/6 identity on a larger case
        for seed in 0..5 {
            let net = random_graph(30, 0.25, 900 + seed);
            let n = net.n();
            let mut a = vec![0u64; n * n];
            for (i, j) in net.edges() {
                a[i * n + j] = 1;
                a[j * n + i] = 1;
            }
            let mut a2 = vec![0u64; n * n];
            for i in 0..n {
                for k in 0..n {
                    if a[i * n + k] == 0 {
                        continue;
                    }
                    for j in 0..n {
                        a2[i * n + j] += a[k * n + j];
                    }
                }
            }
            let mut trace3 = 0u64;
            for i in 0..n {
                for k in 0..n {
                    trace3 += a2[i * n + k] * a[k * n + i];
                }
            }
            assert_eq!(closed_triads(&net).unwrap(), trace3 / 6);
        }
    }

    #[test]
    fn components_count_isolates_as_singletons() {
        // one connected cluster of 4 + 3 isolates → 4 components, 3 isolates
        let net = BinaryNetwork::from_edges(nodes(7), 0, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(components_and_isolates(&net), (4, 3));
        assert_eq!(components_and_isolates(&complete(5)), (1, 0));
        let empty = BinaryNetwork::empty(nodes(5), 0);
        assert_eq!(components_and_isolates(&empty), (5, 5));
    }

    #[test]
    fn connecting_two_components_decreases_count_by_one() {
        let net = BinaryNetwork::from_edges(nodes(6), 0, &[(0, 1), (2, 3)]).unwrap();
        let (before, _) = components_and_isolates(&net);
        let joined = BinaryNetwork::from_edges(nodes(6), 0, &[(0, 1), (2, 3), (1, 2)]).unwrap();
        let (after, _) = components_and_isolates(&joined);
        assert_eq!(after, before - 1);
    }

    #[test]
    fn summarize_known_fixture() {
        // 5 nodes: edges (0,1,w=7) and a 2-3-4 triangle with weights 1,2,3; node order known
        let net = ValuedNetwork::from_edges(
            nodes(5),
            2008,
            &[(0, 1, 7), (2, 3, 1), (3, 4, 2), (2, 4, 3)],
        )
        .unwrap();
        let s = summarize(&net).unwrap();
        assert_eq!(s.year, 2008);
        assert_eq!(s.nodes, 5);
        assert_eq!(s.isolates, 0);
        assert_eq!(s.total_edges, 4);
        assert_eq!(s.total_weight, 13);
        assert_eq!(s.max_weight, 7);
        assert_eq!(s.components, 2);
        assert_abs_diff_eq!(s.density, 0.4, epsilon = 1e-12);
        assert_eq!(s.closed_triads, 1);
    }

    #[test]
    fn summarize_degenerate_cases() {
        let zero = ValuedNetwork::empty(nodes(4), 2000);
        let s = summarize(&zero).unwrap();
        assert_eq!(s.total_weight, 0);
        assert_eq!(s.max_weight, 0);
        assert_eq!(s.density, 0.0);
        assert_eq!(s.isolates, 4);
        assert_eq!(s.components, 4);

        let single = ValuedNetwork::from_edges(nodes(4), 2000, &[(0, 1, 7)]).unwrap();
        let s = summarize(&single).unwrap();
        assert_eq!(s.total_edges, 1);
        assert_eq!(s.total_weight, 7);
        assert_eq!(s.max_weight, 7);
    }

    #[test]
    fn isolates_bounded_by_components() {
        for seed in 0..100 {
            let net = random_graph(9, 0.15, 777 + seed);
            let (components, isolates) = components_and_isolates(&net);
            assert!(isolates <= components);
        }
    }

    #[test]
    fn democracy_summary_means_and_diffs() {
        let ns = nodes(3);
        let mut panel = AttributePanel::new(Arc::clone(&ns), vec![2008, 2009, 2010]).unwrap();
        // year-major: [y2008 nodes.., y2009 nodes.., y2010 nodes..]
        panel
            .insert_numeric(
                "libdem",
                vec![
                    0.5, 0.2, 0.8, // 2008
                    0.5, 0.4, 0.7, // 2009
                    0.5, 0.6, 0.6, // 2010
                ],
            )
            .unwrap();
        let rows = democracy_summary(&panel, "libdem").unwrap();
        assert_eq!(rows.len(), 3);
        // sorted descending by mean: node2 (0.7), node0 (0.5), node1 (0.4)
        assert_eq!(rows[0].code, "AAC");
        assert_abs_diff_eq!(rows[0].mean, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(rows[0].diff.unwrap(), -0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(rows[1].mean, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rows[1].diff.unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rows[2].diff.unwrap(), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn democracy_summary_needs_two_years() {
        let ns = nodes(2);
        let mut panel = AttributePanel::new(Arc::clone(&ns), vec![2008]).unwrap();
        panel.insert_numeric("libdem", vec![0.1, 0.2]).unwrap();
        assert!(democracy_summary(&panel, "libdem").is_err());
    }
}
