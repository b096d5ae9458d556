//! Core network representations: valued and binary undirected networks over a
//! fixed node set, per-node attribute panels, and symmetric edge covariates.
//!
//! Networks are immutable after construction and cheap to share across
//! threads; node sets are held behind `Arc` so yearly cross-sections of one
//! series share a single canonical ordering.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Ordered set of node identifiers (ISO3-style country codes).
///
/// The order is canonical for every matrix indexed against the set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSet {
    codes: Vec<String>,
    index: HashMap<String, usize>,
}

impl NodeSet {
    /// Builds a node set preserving the given order. Duplicate codes are rejected.
    pub fn new<I, S>(codes: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let codes: Vec<String> = codes.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(codes.len());
        for (i, c) in codes.iter().enumerate() {
            if index.insert(c.clone(), i).is_some() {
                return Err(Error::Graph(format!("duplicate node code `{c}`")));
            }
        }
        Ok(Self { codes, index })
    }

    /// Builds a node set in canonical sorted order.
    pub fn sorted<I, S>(codes: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut codes: Vec<String> = codes.into_iter().map(Into::into).collect();
        codes.sort();
        Self::new(codes)
    }

    /// Deterministic synthetic codes AAA, AAB, ... for generated fixtures.
    pub fn synthetic(n: usize) -> Self {
        assert!(n <= 26 * 26 * 26, "synthetic node sets support up to 17576 nodes");
        let codes: Vec<String> = (0..n)
            .map(|i| {
                let (a, b, c) = (i / 676, (i / 26) % 26, i % 26);
                let ch = |x: usize| (b'A' + x as u8) as char;
                format!("{}{}{}", ch(a), ch(b), ch(c))
            })
            .collect();
        Self::new(codes).expect("synthetic codes are unique")
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn code(&self, i: usize) -> &str {
        &self.codes[i]
    }

    pub fn codes(&self) -> &[String] {
        &self.codes
    }

    pub fn position(&self, code: &str) -> Option<usize> {
        self.index.get(code).copied()
    }

    pub fn contains(&self, code: &str) -> bool {
        self.index.contains_key(code)
    }
}

/// Packed symmetric boolean adjacency with a zero diagonal.
///
/// Rows are 64-bit words so neighborhood intersections (shared-partner
/// counts) reduce to a handful of AND+popcount operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(n: usize) -> Self {
        let words_per_row = n.div_ceil(64);
        Self { n, words_per_row, bits: vec![0; n * words_per_row] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        let w = self.bits[i * self.words_per_row + j / 64];
        (w >> (j % 64)) & 1 == 1
    }

    /// Sets both (i, j) and (j, i). Setting the diagonal is a bug.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        debug_assert_ne!(i, j, "diagonal entries must stay zero");
        for (a, b) in [(i, j), (j, i)] {
            let idx = a * self.words_per_row + b / 64;
            let mask = 1u64 << (b % 64);
            if value {
                self.bits[idx] |= mask;
            } else {
                self.bits[idx] &= !mask;
            }
        }
    }

    #[inline]
    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    /// Number of neighbors of node `i`.
    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of common neighbors of `i` and `j` (excludes `i` and `j`
    /// themselves since the diagonal is zero).
    #[inline]
    pub fn common_neighbors(&self, i: usize, j: usize) -> usize {
        let (ri, rj) = (self.row(i), self.row(j));
        ri.iter().zip(rj).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    /// Indices of common neighbors of `i` and `j`, ascending.
    pub fn common_neighbor_ids(&self, i: usize, j: usize) -> Vec<usize> {
        let (ri, rj) = (self.row(i), self.row(j));
        let mut out = Vec::new();
        for (w, (a, b)) in ri.iter().zip(rj).enumerate() {
            let mut x = a & b;
            while x != 0 {
                let bit = x.trailing_zeros() as usize;
                out.push(w * 64 + bit);
                x &= x - 1;
            }
        }
        out
    }

    /// Indices of neighbors of `i`, ascending.
    pub fn neighbor_ids(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, a) in self.row(i).iter().enumerate() {
            let mut x = *a;
            while x != 0 {
                let bit = x.trailing_zeros() as usize;
                out.push(w * 64 + bit);
                x &= x - 1;
            }
        }
        out
    }
}

/// Undirected valued network: symmetric non-negative integer weights, zero
/// diagonal, one year label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuedNetwork {
    nodes: Arc<NodeSet>,
    year: i32,
    weights: Vec<u32>,
}

impl ValuedNetwork {
    pub fn empty(nodes: Arc<NodeSet>, year: i32) -> Self {
        let n = nodes.len();
        Self { nodes, year, weights: vec![0; n * n] }
    }

    /// Builds a network from an edge list; repeated (i, j) entries are summed.
    /// Self-loops are rejected.
    pub fn from_edges(nodes: Arc<NodeSet>, year: i32, edges: &[(usize, usize, u32)]) -> Result<Self> {
        let mut net = Self::empty(nodes, year);
        let n = net.n();
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::Graph(format!("edge ({i},{j}) out of range for {n} nodes")));
            }
            if i == j {
                return Err(Error::Graph(format!("self-loop on node {i} rejected")));
            }
            let cur = net.weights[i * n + j];
            let new = cur
                .checked_add(w)
                .ok_or_else(|| Error::Graph(format!("weight overflow on edge ({i},{j})")))?;
            net.weights[i * n + j] = new;
            net.weights[j * n + i] = new;
        }
        Ok(net)
    }

    /// Builds directly from a full matrix, validating symmetry and the zero diagonal.
    pub fn from_matrix(nodes: Arc<NodeSet>, year: i32, weights: Vec<u32>) -> Result<Self> {
        let n = nodes.len();
        if weights.len() != n * n {
            return Err(Error::Graph(format!(
                "weight matrix has {} entries, expected {}",
                weights.len(),
                n * n
            )));
        }
        for i in 0..n {
            if weights[i * n + i] != 0 {
                return Err(Error::Graph(format!("nonzero diagonal at node {i}")));
            }
            for j in 0..i {
                if weights[i * n + j] != weights[j * n + i] {
                    return Err(Error::Graph(format!("asymmetric weights at ({i},{j})")));
                }
            }
        }
        Ok(Self { nodes, year, weights })
    }

    pub fn nodes(&self) -> &Arc<NodeSet> {
        &self.nodes
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> u32 {
        self.weights[i * self.n() + j]
    }

    /// Sets the symmetric pair (i, j). Internal mutation used by samplers and
    /// builders; the diagonal is untouchable.
    pub(crate) fn set_weight(&mut self, i: usize, j: usize, w: u32) {
        debug_assert_ne!(i, j);
        let n = self.n();
        self.weights[i * n + j] = w;
        self.weights[j * n + i] = w;
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    /// Sum of weights over unordered dyads.
    pub fn total_weight(&self) -> u64 {
        let n = self.n();
        let mut total = 0u64;
        for i in 0..n {
            for j in (i + 1)..n {
                total += u64::from(self.weights[i * n + j]);
            }
        }
        total
    }

    pub fn max_weight(&self) -> u32 {
        self.weights.iter().copied().max().unwrap_or(0)
    }

    /// Sum of weights incident to node `i`.
    pub fn strength(&self, i: usize) -> Result<u64> {
        let n = self.n();
        if i >= n {
            return Err(Error::Graph(format!("node index {i} out of range for {n} nodes")));
        }
        Ok((0..n).map(|j| u64::from(self.weights[i * n + j])).sum())
    }

    /// Number of incident edges with nonzero weight.
    pub fn nonzero_degree(&self, i: usize) -> usize {
        let n = self.n();
        (0..n).filter(|&j| self.weights[i * n + j] > 0).count()
    }

    /// Count of dyads with nonzero weight.
    pub fn edge_count(&self) -> usize {
        let n = self.n();
        let mut count = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if self.weights[i * n + j] > 0 {
                    count += 1;
                }
            }
        }
        count
    }

    /// Thresholds weights into a 0/1 adjacency: edge present iff weight ≥ threshold.
    pub fn binarize(&self, threshold: u32) -> Result<BinaryNetwork> {
        if threshold < 1 {
            return Err(Error::Graph("binarize threshold must be ≥ 1".into()));
        }
        let n = self.n();
        let mut adj = BitMatrix::zeros(n);
        for i in 0..n {
            for j in (i + 1)..n {
                if self.weights[i * n + j] >= threshold {
                    adj.set(i, j, true);
                }
            }
        }
        Ok(BinaryNetwork { nodes: Arc::clone(&self.nodes), year: self.year, adj })
    }

    pub fn dyads(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.n();
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
    }
}

/// Undirected simple graph view used by binary models and descriptives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryNetwork {
    nodes: Arc<NodeSet>,
    year: i32,
    adj: BitMatrix,
}

impl BinaryNetwork {
    pub fn empty(nodes: Arc<NodeSet>, year: i32) -> Self {
        let n = nodes.len();
        Self { nodes, year, adj: BitMatrix::zeros(n) }
    }

    pub fn from_edges(nodes: Arc<NodeSet>, year: i32, edges: &[(usize, usize)]) -> Result<Self> {
        let mut net = Self::empty(nodes, year);
        let n = net.n();
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Graph(format!("edge ({i},{j}) out of range for {n} nodes")));
            }
            if i == j {
                return Err(Error::Graph(format!("self-loop on node {i} rejected")));
            }
            net.adj.set(i, j, true);
        }
        Ok(net)
    }

    pub fn nodes(&self) -> &Arc<NodeSet> {
        &self.nodes
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj.get(i, j)
    }

    pub(crate) fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        self.adj.set(i, j, present);
    }

    pub fn adjacency(&self) -> &BitMatrix {
        &self.adj
    }

    /// Number of neighbors of node `i`.
    pub fn degree(&self, i: usize) -> Result<usize> {
        if i >= self.n() {
            return Err(Error::Graph(format!("node index {i} out of range for {} nodes", self.n())));
        }
        Ok(self.adj.degree(i))
    }

    pub fn edge_count(&self) -> usize {
        let n = self.n();
        let total: usize = (0..n).map(|i| self.adj.degree(i)).sum();
        total / 2
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in self.adj.neighbor_ids(i) {
                if j > i {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn dyads(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.n();
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
    }

    /// Weight view of the adjacency (1 per edge), useful where a valued
    /// network is expected.
    pub fn to_valued(&self) -> ValuedNetwork {
        let n = self.n();
        let mut net = ValuedNetwork::empty(Arc::clone(&self.nodes), self.year);
        for i in 0..n {
            for j in (i + 1)..n {
                if self.adj.get(i, j) {
                    net.set_weight(i, j, 1);
                }
            }
        }
        net
    }
}

/// Symmetric real-valued dyadic covariate (distances, lagged ties, trends).
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCovariateMatrix {
    nodes: Arc<NodeSet>,
    label: String,
    values: Vec<f64>,
}

impl EdgeCovariateMatrix {
    pub fn new(nodes: Arc<NodeSet>, label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let n = nodes.len();
        if values.len() != n * n {
            return Err(Error::Graph(format!(
                "covariate matrix has {} entries, expected {}",
                values.len(),
                n * n
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() {
                    return Err(Error::Graph(format!("non-finite covariate entry at ({i},{j})")));
                }
                if (v - values[j * n + i]).abs() > 1e-9 * v.abs().max(1.0) {
                    return Err(Error::Graph(format!("asymmetric covariate entry at ({i},{j})")));
                }
            }
        }
        Ok(Self { nodes, label: label.into(), values })
    }

    pub fn constant(nodes: Arc<NodeSet>, label: impl Into<String>, value: f64) -> Self {
        let n = nodes.len();
        Self { nodes, label: label.into(), values: vec![value; n * n] }
    }

    pub fn nodes(&self) -> &Arc<NodeSet> {
        &self.nodes
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nodes.len() + j]
    }
}

/// Categorical node attribute: level codes per (year, node) plus level labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalAttr {
    pub levels: Vec<String>,
    /// One code per (year, node), year-major, indexing into `levels`.
    pub codes: Vec<u8>,
}

/// Per-node, per-year covariates shared by descriptives and model terms.
///
/// All vectors are year-major: index `year_idx * n + node_idx`. A panel is
/// complete by construction — gap handling lives in the imputation stage.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributePanel {
    nodes: Arc<NodeSet>,
    years: Vec<i32>,
    numeric: HashMap<String, Vec<f64>>,
    categorical: HashMap<String, CategoricalAttr>,
}

/// Canonical attribute names used by the publication pipeline.
pub mod attr_names {
    pub const LIBDEM: &str = "libdem";
    pub const LN_GDP_PC: &str = "ln_gdp_pc";
    pub const LN_POPULATION: &str = "ln_population";
    pub const URBANIZATION: &str = "urbanization";
    pub const LN_AUTHORS: &str = "ln_authors";
    pub const REGION: &str = "region";
}

impl AttributePanel {
    pub fn new(nodes: Arc<NodeSet>, years: Vec<i32>) -> Result<Self> {
        if years.is_empty() {
            return Err(Error::Panel("panel needs at least one year".into()));
        }
        if years.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Panel("panel years must be strictly increasing".into()));
        }
        Ok(Self { nodes, years, numeric: HashMap::new(), categorical: HashMap::new() })
    }

    pub fn insert_numeric(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let expect = self.years.len() * self.nodes.len();
        if values.len() != expect {
            return Err(Error::Panel(format!("attribute vector has {} entries, expected {expect}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Panel("numeric attributes must be finite (impute gaps first)".into()));
        }
        self.numeric.insert(name.into(), values);
        Ok(())
    }

    pub fn insert_categorical(&mut self, name: impl Into<String>, attr: CategoricalAttr) -> Result<()> {
        let expect = self.years.len() * self.nodes.len();
        if attr.codes.len() != expect {
            return Err(Error::Panel(format!("attribute vector has {} entries, expected {expect}", attr.codes.len())));
        }
        if attr.codes.iter().any(|&c| usize::from(c) >= attr.levels.len()) {
            return Err(Error::Panel("categorical code out of range".into()));
        }
        self.categorical.insert(name.into(), attr);
        Ok(())
    }

    pub fn nodes(&self) -> &Arc<NodeSet> {
        &self.nodes
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn year_index(&self, year: i32) -> Option<usize> {
        self.years.iter().position(|&y| y == year)
    }

    /// Per-node slice of a numeric attribute for one year.
    pub fn numeric_year(&self, name: &str, year: i32) -> Option<&[f64]> {
        let yi = self.year_index(year)?;
        let n = self.nodes.len();
        self.numeric.get(name).map(|v| &v[yi * n..(yi + 1) * n])
    }

    /// Per-node level codes of a categorical attribute for one year.
    pub fn categorical_year(&self, name: &str, year: i32) -> Option<(&[u8], &[String])> {
        let yi = self.year_index(year)?;
        let n = self.nodes.len();
        self.categorical
            .get(name)
            .map(|a| (&a.codes[yi * n..(yi + 1) * n], &a.levels[..]))
    }

    pub fn numeric_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.numeric.keys().map(String::as_str).collect();
        names.sort_unstable();
        names
    }

    pub fn categorical_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.categorical.keys().map(String::as_str).collect();
        names.sort_unstable();
        names
    }

    /// Full year-major vector of a numeric attribute.
    pub fn numeric_all(&self, name: &str) -> Option<&[f64]> {
        self.numeric.get(name).map(Vec::as_slice)
    }
}

/// Yearly valued networks over one shared node ordering, consecutive years.
#[derive(Debug, Clone)]
pub struct NetworkSeries {
    networks: Vec<ValuedNetwork>,
}

impl NetworkSeries {
    pub fn new(networks: Vec<ValuedNetwork>) -> Result<Self> {
        if networks.is_empty() {
            return Err(Error::Graph("a network series needs at least one year".into()));
        }
        let first = &networks[0];
        for net in &networks[1..] {
            if net.nodes().codes() != first.nodes().codes() {
                return Err(Error::Graph("all networks in a series must share one node ordering".into()));
            }
        }
        if networks.windows(2).any(|w| w[1].year() != w[0].year() + 1) {
            return Err(Error::Graph("series years must be consecutive".into()));
        }
        Ok(Self { networks })
    }

    pub fn networks(&self) -> &[ValuedNetwork] {
        &self.networks
    }

    pub fn len(&self) -> usize {
        self.networks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.networks.is_empty()
    }

    pub fn nodes(&self) -> &Arc<NodeSet> {
        self.networks[0].nodes()
    }

    pub fn years(&self) -> Vec<i32> {
        self.networks.iter().map(ValuedNetwork::year).collect()
    }

    pub fn get_year(&self, year: i32) -> Option<&ValuedNetwork> {
        self.networks.iter().find(|n| n.year() == year)
    }
}

/// Reindexes raw yearly networks onto one shared node set.
///
/// The reference year's node set defines the roster; nodes without attribute
/// coverage in the panel are dropped from every year, and nodes absent from a
/// given year's raw network become isolates. Years must come out consecutive.
pub fn align_node_sets(
    raw: &[ValuedNetwork],
    panel: &AttributePanel,
    reference_year: i32,
) -> Result<NetworkSeries> {
    let reference = raw
        .iter()
        .find(|n| n.year() == reference_year)
        .ok_or_else(|| Error::Graph(format!("reference year {reference_year} not present")))?;

    let retained: Vec<String> = reference
        .nodes()
        .codes()
        .iter()
        .filter(|c| panel.nodes().contains(c))
        .cloned()
        .collect();
    if retained.is_empty() {
        return Err(Error::Graph("empty intersection between reference node set and attribute panel".into()));
    }
    let nodes = Arc::new(NodeSet::sorted(retained)?);

    let mut sorted: Vec<&ValuedNetwork> = raw.iter().collect();
    sorted.sort_by_key(|n| n.year());

    let mut out = Vec::with_capacity(sorted.len());
    for net in sorted {
        let mut aligned = ValuedNetwork::empty(Arc::clone(&nodes), net.year());
        // Map retained codes into the raw network's indexing; absent → isolate.
        let src: Vec<Option<usize>> =
            nodes.codes().iter().map(|c| net.nodes().position(c)).collect();
        for i in 0..nodes.len() {
            for j in (i + 1)..nodes.len() {
                if let (Some(si), Some(sj)) = (src[i], src[j]) {
                    let w = net.weight(si, sj);
                    if w > 0 {
                        aligned.set_weight(i, j, w);
                    }
                }
            }
        }
        out.push(aligned);
    }
    NetworkSeries::new(out)
}

/// Collects the distinct codes present in any of the raw networks.
pub fn union_codes(raw: &[ValuedNetwork]) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for net in raw {
        for c in net.nodes().codes() {
            if seen.insert(c.clone()) {
                out.push(c.clone());
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(n: usize) -> Arc<NodeSet> {
        Arc::new(NodeSet::synthetic(n))
    }

    #[test]
    fn build_network_sums_repeated_edges() {
        let net = ValuedNetwork::from_edges(nodes(3), 2008, &[(0, 1, 1), (0, 1, 2)]).unwrap();
        assert_eq!(net.weight(0, 1), 3);
        assert_eq!(net.weight(1, 0), 3);
        assert_eq!(net.weight(0, 2), 0);
    }

    #[test]
    fn build_network_forces_symmetry() {
        let net = ValuedNetwork::from_edges(nodes(3), 2008, &[(0, 1, 2)]).unwrap();
        let n = net.n();
        for i in 0..n {
            assert_eq!(net.weight(i, i), 0);
            for j in 0..n {
                assert_eq!(net.weight(i, j), net.weight(j, i));
            }
        }
    }

    #[test]
    fn empty_edge_list_gives_zero_matrix() {
        let net = ValuedNetwork::from_edges(nodes(2), 2010, &[]).unwrap();
        assert_eq!(net.total_weight(), 0);
        assert_eq!(net.max_weight(), 0);
    }

    #[test]
    fn self_loops_rejected() {
        assert!(ValuedNetwork::from_edges(nodes(3), 2010, &[(1, 1, 4)]).is_err());
    }

    #[test]
    fn binarize_thresholds() {
        let net = ValuedNetwork::from_edges(nodes(3), 2008, &[(0, 1, 1), (1, 2, 2)]).unwrap();
        let b1 = net.binarize(1).unwrap();
        assert!(b1.has_edge(0, 1));
        assert!(b1.has_edge(1, 2));
        assert!(!b1.has_edge(0, 2));
        let b3 = net.binarize(3).unwrap();
        assert!(!b3.has_edge(1, 2));
        assert!(net.binarize(0).is_err());
    }

    #[test]
    fn binarize_at_one_preserves_nonzero_edge_count() {
        let net = ValuedNetwork::from_edges(nodes(5), 2008, &[(0, 1, 7), (2, 3, 1), (1, 4, 2)]).unwrap();
        assert_eq!(net.binarize(1).unwrap().edge_count(), net.edge_count());
    }

    #[test]
    fn degree_and_strength() {
        // star center 0 with 4 leaves
        let star = BinaryNetwork::from_edges(nodes(5), 0, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(star.degree(0).unwrap(), 4);
        assert_eq!(star.degree(1).unwrap(), 1);
        assert!(star.degree(9).is_err());

        let net = ValuedNetwork::from_edges(nodes(4), 0, &[(0, 1, 6), (0, 2, 3), (0, 3, 1)]).unwrap();
        assert_eq!(net.strength(0).unwrap(), 10);
        assert_eq!(net.strength(3).unwrap(), 1);
        // isolate
        let iso = ValuedNetwork::empty(nodes(3), 0);
        assert_eq!(iso.strength(1).unwrap(), 0);
        assert_eq!(iso.binarize(1).unwrap().degree(1).unwrap(), 0);
    }

    #[test]
    fn strength_matches_row_sum() {
        let net = ValuedNetwork::from_edges(nodes(6), 0, &[(0, 1, 2), (0, 3, 5), (1, 3, 1), (4, 5, 9)]).unwrap();
        for i in 0..net.n() {
            let row_sum: u64 = (0..net.n()).map(|j| u64::from(net.weight(i, j))).sum();
            assert_eq!(net.strength(i).unwrap(), row_sum);
        }
    }

    #[test]
    fn bitmatrix_common_neighbors() {
        let mut m = BitMatrix::zeros(70);
        m.set(0, 65, true);
        m.set(1, 65, true);
        m.set(0, 3, true);
        m.set(1, 3, true);
        m.set(0, 2, true);
        assert_eq!(m.common_neighbors(0, 1), 2);
        assert_eq!(m.common_neighbor_ids(0, 1), vec![3, 65]);
        assert_eq!(m.degree(0), 3);
    }

    #[test]
    fn align_reindexes_and_drops() {
        // raw 2016 network over {AAA, AAB}, raw 2017 over {AAA, AAB, AAC, AAD}
        let ns16 = Arc::new(NodeSet::new(["AAA", "AAB"]).unwrap());
        let ns17 = Arc::new(NodeSet::new(["AAA", "AAB", "AAC", "AAD"]).unwrap());
        let raw16 = ValuedNetwork::from_edges(ns16, 2016, &[(0, 1, 5)]).unwrap();
        let raw17 = ValuedNetwork::from_edges(ns17, 2017, &[(0, 2, 3), (1, 3, 2)]).unwrap();

        // panel covers AAA, AAB, AAC only → AAD dropped everywhere
        let pn = Arc::new(NodeSet::new(["AAA", "AAB", "AAC"]).unwrap());
        let panel = AttributePanel::new(pn, vec![2016, 2017]).unwrap();

        let series = align_node_sets(&[raw16.clone(), raw17.clone()], &panel, 2017).unwrap();
        assert_eq!(series.nodes().codes(), &["AAA", "AAB", "AAC"]);
        let y16 = series.get_year(2016).unwrap();
        let y17 = series.get_year(2017).unwrap();
        // AAC is an isolate in 2016 (absent from the raw year)
        assert_eq!(y16.strength(2).unwrap(), 0);
        assert_eq!(y16.weight(0, 1), 5);
        // AAD's edge dropped; AAA-AAC retained
        assert_eq!(y17.weight(0, 2), 3);
        assert_eq!(y17.total_weight(), 3);
    }

    #[test]
    fn align_preserves_weight_among_retained_pairs() {
        let ns = Arc::new(NodeSet::new(["AAA", "AAB", "AAC"]).unwrap());
        let raw = ValuedNetwork::from_edges(Arc::clone(&ns), 2017, &[(0, 1, 4), (1, 2, 6)]).unwrap();
        let panel = AttributePanel::new(Arc::clone(&ns), vec![2017]).unwrap();
        let series = align_node_sets(std::slice::from_ref(&raw), &panel, 2017).unwrap();
        assert_eq!(series.networks()[0].total_weight(), raw.total_weight());
    }

    #[test]
    fn align_identity_when_sets_match() {
        let ns = Arc::new(NodeSet::new(["AAA", "AAB"]).unwrap());
        let raw = ValuedNetwork::from_edges(Arc::clone(&ns), 2017, &[(0, 1, 2)]).unwrap();
        let panel = AttributePanel::new(Arc::clone(&ns), vec![2017]).unwrap();
        let series = align_node_sets(std::slice::from_ref(&raw), &panel, 2017).unwrap();
        assert_eq!(series.networks()[0].weights(), raw.weights());
    }

    #[test]
    fn align_errors_on_empty_intersection() {
        let ns = Arc::new(NodeSet::new(["AAA"]).unwrap());
        let raw = ValuedNetwork::empty(ns, 2017);
        let pn = Arc::new(NodeSet::new(["ZZZ"]).unwrap());
        let panel = AttributePanel::new(pn, vec![2017]).unwrap();
        assert!(align_node_sets(std::slice::from_ref(&raw), &panel, 2017).is_err());
    }

    #[test]
    fn series_requires_consecutive_years() {
        let ns = nodes(2);
        let a = ValuedNetwork::empty(Arc::clone(&ns), 2008);
        let b = ValuedNetwork::empty(Arc::clone(&ns), 2010);
        assert!(NetworkSeries::new(vec![a, b]).is_err());
    }
}
