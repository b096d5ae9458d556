//! Model statistic terms for binary and valued exponential-family network
//! models: specification, compilation against node/dyad covariate data, full
//! evaluation, and incremental change statistics.
//!
//! Change statistics are the workhorse of both pseudolikelihood estimation
//! and Metropolis-Hastings sampling, so every term carries an incremental
//! form that must agree with full recomputation to high precision (the test
//! suites enforce 1e-9).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AttributePanel, BinaryNetwork, BitMatrix, EdgeCovariateMatrix, ValuedNetwork};

/// One model term with fixed hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TermSpec {
    /// Number of edges (binary) or sum of weights (valued).
    Edges,
    /// Σ y_ij (x_i + x_j) for a numeric attribute.
    Nodecov { attr: String },
    /// Σ y_ij |x_i − x_j|; negative coefficients indicate homophily.
    Absdiff { attr: String },
    /// Σ y_ij 1[c_i = c_j] for a categorical attribute.
    Nodematch { attr: String },
    /// Per non-reference level ℓ: Σ y_ij (1[c_i = ℓ] + 1[c_j = ℓ]).
    Nodefactor {
        attr: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reference: Option<String>,
    },
    /// Σ y_ij C_ij for a named symmetric dyadic covariate.
    Edgecov { label: String },
    /// Geometrically weighted degree distribution with fixed decay.
    Gwdegree { decay: f64 },
    /// Geometrically weighted edgewise shared partners with fixed decay.
    Gwesp { decay: f64 },
    /// Σ y_ij over dyads (valued intercept).
    Sum,
    /// Σ 1[y_ij > 0] (zero-inflation statistic).
    Nonzero,
    /// Σ_i Σ_{j<k; j,k≠i} √(y_ij · y_ik): actor heterogeneity in tie strength.
    Nodesqrtcovar,
    /// Σ_{i<j} min(y_ij, max_k min(y_ik, y_kj)): hierarchical transitivity.
    Transitiveweights,
    /// Autoregressive edge covariate: the previous period's binary network.
    MemoryLag,
    /// Constant dyadic covariate equal to the 1-based period index.
    TimeTrend,
}

impl TermSpec {
    /// Identity used for duplicate detection inside one model.
    fn identity(&self) -> String {
        match self {
            TermSpec::Edges => "edges".into(),
            TermSpec::Nodecov { attr } => format!("nodecov.{attr}"),
            TermSpec::Absdiff { attr } => format!("absdiff.{attr}"),
            TermSpec::Nodematch { attr } => format!("nodematch.{attr}"),
            TermSpec::Nodefactor { attr, .. } => format!("nodefactor.{attr}"),
            TermSpec::Edgecov { label } => format!("edgecov.{label}"),
            TermSpec::Gwdegree { .. } => "gwdegree".into(),
            TermSpec::Gwesp { .. } => "gwesp".into(),
            TermSpec::Sum => "sum".into(),
            TermSpec::Nonzero => "nonzero".into(),
            TermSpec::Nodesqrtcovar => "nodesqrtcovar".into(),
            TermSpec::Transitiveweights => "transitiveweights".into(),
            TermSpec::MemoryLag => "memory_lag".into(),
            TermSpec::TimeTrend => "time_trend".into(),
        }
    }
}

/// Whether the model is over 0/1 ties or counts in {0..max}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelMode {
    Binary,
    Valued { max: u32 },
}

impl ModelMode {
    pub fn is_valued(&self) -> bool {
        matches!(self, ModelMode::Valued { .. })
    }
}

/// An ordered list of terms plus the model mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub mode: ModelMode,
    pub terms: Vec<TermSpec>,
}

impl ModelSpec {
    pub fn binary(terms: Vec<TermSpec>) -> Self {
        Self { mode: ModelMode::Binary, terms }
    }

    pub fn valued(max: u32, terms: Vec<TermSpec>) -> Self {
        Self { mode: ModelMode::Valued { max }, terms }
    }

    /// Checks duplicate identities, mode constraints, and hyperparameters.
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for term in &self.terms {
            let id = term.identity();
            if !seen.insert(id.clone()) {
                return Err(Error::Model(format!("duplicate term `{id}`")));
            }
            match term {
                TermSpec::Gwdegree { decay } | TermSpec::Gwesp { decay } => {
                    if !(*decay > 0.0) {
                        return Err(Error::Model(format!("decay {decay} must be > 0")));
                    }
                    if self.mode.is_valued() {
                        return Err(Error::Model(format!("`{id}` is a binary-only term", id = id)));
                    }
                }
                TermSpec::Sum
                | TermSpec::Nonzero
                | TermSpec::Nodesqrtcovar
                | TermSpec::Transitiveweights => {
                    if !self.mode.is_valued() {
                        return Err(Error::Model(format!("`{id}` is a valued-only term")));
                    }
                }
                _ => {}
            }
        }
        if let ModelMode::Valued { max } = self.mode {
            if max < 1 {
                return Err(Error::Model("valued mode needs max ≥ 1".into()));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Node- and dyad-level data a model is compiled against.
#[derive(Debug, Clone, Default)]
pub struct ModelData {
    /// Per-node numeric attributes, length n each.
    pub numeric: HashMap<String, Vec<f64>>,
    /// Per-node categorical attributes: (level codes, level labels).
    pub categorical: HashMap<String, (Vec<u8>, Vec<String>)>,
    /// Named symmetric dyadic covariates, n×n each.
    pub covariates: HashMap<String, Vec<f64>>,
    /// Previous-period binary adjacency for the memory term, n×n of 0/1.
    pub memory: Option<Vec<f64>>,
    /// 1-based period index for the time-trend term.
    pub time_index: Option<f64>,
}

impl ModelData {
    pub fn new() -> Self {
        Self::default()
    }

    /// Extracts one year's attribute cross-section from a panel.
    pub fn from_panel_year(panel: &AttributePanel, year: i32) -> Result<Self> {
        let mut data = Self::new();
        if panel.year_index(year).is_none() {
            return Err(Error::Panel(format!("year {year} not covered by the panel")));
        }
        for name in panel.numeric_names() {
            let slice = panel.numeric_year(name, year).expect("name and year exist");
            data.numeric.insert(name.to_string(), slice.to_vec());
        }
        for name in panel.categorical_names() {
            let (codes, levels) = panel.categorical_year(name, year).expect("name and year exist");
            data.categorical.insert(name.to_string(), (codes.to_vec(), levels.to_vec()));
        }
        Ok(data)
    }

    pub fn add_covariate(&mut self, cov: &EdgeCovariateMatrix) {
        self.covariates.insert(cov.label().to_string(), cov.values().to_vec());
    }

    /// Installs the lag network for the memory term.
    pub fn set_memory(&mut self, previous: &BinaryNetwork) {
        let n = previous.n();
        let mut m = vec![0.0; n * n];
        for (i, j) in previous.edges() {
            m[i * n + j] = 1.0;
            m[j * n + i] = 1.0;
        }
        self.memory = Some(m);
    }

    pub fn set_time_index(&mut self, t: f64) {
        self.time_index = Some(t);
    }
}

#[derive(Debug, Clone)]
enum CompiledTerm {
    /// Edge count (binary) / weight sum (valued).
    EdgesOrSum,
    Nonzero,
    /// Σ y_ij · coef_ij with a precomputed symmetric coefficient matrix.
    Dyadic(Box<[f64]>),
    GwDegree { exp_decay: f64, u: f64 },
    Gwesp { exp_decay: f64, u: f64 },
    NodeSqrtCovar,
    TransitiveWeights,
}

#[derive(Debug, Clone)]
struct CompiledStat {
    label: String,
    term: CompiledTerm,
}

/// A model specification bound to one network size and data context,
/// expanded to one entry per statistic.
#[derive(Debug, Clone)]
pub struct CompiledModel {
    mode: ModelMode,
    n: usize,
    stats: Vec<CompiledStat>,
    warnings: Vec<String>,
}

impl CompiledModel {
    pub fn mode(&self) -> ModelMode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of expanded statistics.
    pub fn dim(&self) -> usize {
        self.stats.len()
    }

    pub fn labels(&self) -> Vec<String> {
        self.stats.iter().map(|s| s.label.clone()).collect()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn max_value(&self) -> u32 {
        match self.mode {
            ModelMode::Binary => 1,
            ModelMode::Valued { max } => max,
        }
    }
}

/// Binds a model to data for a network of `n` nodes, expanding factor terms.
pub fn compile(spec: &ModelSpec, n: usize, data: &ModelData) -> Result<CompiledModel> {
    spec.validate()?;
    let mut stats = Vec::new();
    let mut warnings = Vec::new();

    for term in &spec.terms {
        match term {
            TermSpec::Edges => stats.push(CompiledStat { label: "edges".into(), term: CompiledTerm::EdgesOrSum }),
            TermSpec::Sum => stats.push(CompiledStat { label: "sum".into(), term: CompiledTerm::EdgesOrSum }),
            TermSpec::Nonzero => stats.push(CompiledStat { label: "nonzero".into(), term: CompiledTerm::Nonzero }),
            TermSpec::Nodesqrtcovar => {
                stats.push(CompiledStat { label: "nodesqrtcovar".into(), term: CompiledTerm::NodeSqrtCovar })
            }
            TermSpec::Transitiveweights => stats.push(CompiledStat {
                label: "transitiveweights".into(),
                term: CompiledTerm::TransitiveWeights,
            }),
            TermSpec::Nodecov { attr } => {
                let x = numeric_attr(data, attr, n)?;
                let coef = dyadic_from(n, |i, j| x[i] + x[j]);
                stats.push(CompiledStat { label: format!("nodecov.{attr}"), term: CompiledTerm::Dyadic(coef) });
            }
            TermSpec::Absdiff { attr } => {
                let x = numeric_attr(data, attr, n)?;
                let coef = dyadic_from(n, |i, j| (x[i] - x[j]).abs());
                stats.push(CompiledStat { label: format!("absdiff.{attr}"), term: CompiledTerm::Dyadic(coef) });
            }
            TermSpec::Nodematch { attr } => {
                let (codes, _) = categorical_attr(data, attr, n)?;
                let coef = dyadic_from(n, |i, j| if codes[i] == codes[j] { 1.0 } else { 0.0 });
                stats.push(CompiledStat { label: format!("nodematch.{attr}"), term: CompiledTerm::Dyadic(coef) });
            }
            TermSpec::Nodefactor { attr, reference } => {
                let (codes, levels) = categorical_attr(data, attr, n)?;
                let expanded = expand_nodefactor(attr, codes, levels, reference.as_deref(), n)?;
                if expanded.is_empty() {
                    warnings.push(format!("nodefactor.{attr}: single observed level, no statistic emitted"));
                }
                stats.extend(expanded);
            }
            TermSpec::Edgecov { label } => {
                let values =
                    data.covariates.get(label).ok_or_else(|| Error::UnknownCovariate(label.clone()))?;
                check_square(values, n, label)?;
                stats.push(CompiledStat {
                    label: format!("edgecov.{label}"),
                    term: CompiledTerm::Dyadic(values.clone().into_boxed_slice()),
                });
            }
            TermSpec::Gwdegree { decay } => stats.push(CompiledStat {
                label: format!("gwdegree.{decay}"),
                term: CompiledTerm::GwDegree { exp_decay: decay.exp(), u: 1.0 - (-decay).exp() },
            }),
            TermSpec::Gwesp { decay } => stats.push(CompiledStat {
                label: format!("gwesp.{decay}"),
                term: CompiledTerm::Gwesp { exp_decay: decay.exp(), u: 1.0 - (-decay).exp() },
            }),
            TermSpec::MemoryLag => {
                let m = data
                    .memory
                    .as_ref()
                    .ok_or_else(|| Error::Model("memory_lag term needs a lag network in the data context".into()))?;
                check_square(m, n, "memory_lag")?;
                stats.push(CompiledStat {
                    label: "memory_lag".into(),
                    term: CompiledTerm::Dyadic(m.clone().into_boxed_slice()),
                });
            }
            TermSpec::TimeTrend => {
                let t = data
                    .time_index
                    .ok_or_else(|| Error::Model("time_trend term needs a period index in the data context".into()))?;
                stats.push(CompiledStat {
                    label: "time_trend".into(),
                    term: CompiledTerm::Dyadic(vec![t; n * n].into_boxed_slice()),
                });
            }
        }
    }

    Ok(CompiledModel { mode: spec.mode, n, stats, warnings })
}

/// Expanded statistic labels for a model (factor terms contribute one label
/// per non-reference level).
pub fn expand_factor_levels(spec: &ModelSpec, n: usize, data: &ModelData) -> Result<Vec<String>> {
    Ok(compile(spec, n, data)?.labels())
}

fn numeric_attr<'d>(data: &'d ModelData, attr: &str, n: usize) -> Result<&'d [f64]> {
    let x = data.numeric.get(attr).ok_or_else(|| Error::UnknownAttribute(attr.into()))?;
    if x.len() != n {
        return Err(Error::Model(format!("attribute `{attr}` has {} values, expected {n}", x.len())));
    }
    Ok(x)
}

fn categorical_attr<'d>(data: &'d ModelData, attr: &str, n: usize) -> Result<(&'d [u8], &'d [String])> {
    let (codes, levels) =
        data.categorical.get(attr).ok_or_else(|| Error::UnknownAttribute(attr.into()))?;
    if codes.len() != n {
        return Err(Error::Model(format!("attribute `{attr}` has {} values, expected {n}", codes.len())));
    }
    Ok((codes, levels))
}

fn check_square(values: &[f64], n: usize, label: &str) -> Result<()> {
    if values.len() != n * n {
        return Err(Error::Model(format!(
            "covariate `{label}` has {} entries, expected {}",
            values.len(),
            n * n
        )));
    }
    Ok(())
}

fn dyadic_from(n: usize, f: impl Fn(usize, usize) -> f64) -> Box<[f64]> {
    let mut coef = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                coef[i * n + j] = f(i, j);
            }
        }
    }
    coef.into_boxed_slice()
}

/// Reference level: explicit if given, otherwise the most frequent observed
/// level, ties broken lexicographically. Emits one statistic per other
/// observed level, in lexicographic label order.
fn expand_nodefactor(
    attr: &str,
    codes: &[u8],
    levels: &[String],
    reference: Option<&str>,
    n: usize,
) -> Result<Vec<CompiledStat>> {
    let mut counts: HashMap<u8, usize> = HashMap::new();
    for &c in codes {
        *counts.entry(c).or_insert(0) += 1;
    }
    let mut observed: Vec<u8> = counts.keys().copied().collect();
    observed.sort_by(|a, b| levels[usize::from(*a)].cmp(&levels[usize::from(*b)]));

    let reference_code = match reference {
        Some(name) => {
            let code = levels
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| Error::Model(format!("nodefactor.{attr}: unknown reference level `{name}`")))?;
            code as u8
        }
        None => observed
            .iter()
            .copied()
            .max_by(|a, b| {
                counts[a]
                    .cmp(&counts[b])
                    // ties: prefer the lexicographically smaller label
                    .then_with(|| levels[usize::from(*b)].cmp(&levels[usize::from(*a)]))
            })
            .expect("at least one observed level"),
    };

    let mut out = Vec::new();
    for level in observed {
        if level == reference_code {
            continue;
        }
        let coef = dyadic_from(n, |i, j| {
            let mut c = 0.0;
            if codes[i] == level {
                c += 1.0;
            }
            if codes[j] == level {
                c += 1.0;
            }
            c
        });
        out.push(CompiledStat {
            label: format!("nodefactor.{attr}.{}", levels[usize::from(level)]),
            term: CompiledTerm::Dyadic(coef),
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Full evaluation
// ---------------------------------------------------------------------------

/// Evaluates every statistic of a binary-mode model on a network.
pub fn eval_binary(model: &CompiledModel, net: &BinaryNetwork) -> Result<Vec<f64>> {
    if model.mode.is_valued() {
        return Err(Error::Model("valued-mode model evaluated on a binary network".into()));
    }
    if net.n() != model.n {
        return Err(Error::Model(format!("network has {} nodes, model compiled for {}", net.n(), model.n)));
    }
    let n = model.n;
    let edges = net.edges();
    let mut out = Vec::with_capacity(model.stats.len());
    for stat in &model.stats {
        let value = match &stat.term {
            CompiledTerm::EdgesOrSum => edges.len() as f64,
            CompiledTerm::Dyadic(coef) => edges.iter().map(|&(i, j)| coef[i * n + j]).sum(),
            CompiledTerm::GwDegree { exp_decay, u } => {
                let mut acc = 0.0;
                for i in 0..n {
                    let d = net.adjacency().degree(i);
                    if d > 0 {
                        acc += 1.0 - u.powi(d as i32);
                    }
                }
                exp_decay * acc
            }
            CompiledTerm::Gwesp { exp_decay, u } => {
                let mut acc = 0.0;
                for &(i, j) in &edges {
                    let c = net.adjacency().common_neighbors(i, j);
                    acc += 1.0 - u.powi(c as i32);
                }
                exp_decay * acc
            }
            _ => unreachable!("valued-only terms rejected by validate()"),
        };
        out.push(value);
    }
    Ok(out)
}

/// Evaluates every statistic of a valued-mode model on a network.
pub fn eval_valued(model: &CompiledModel, net: &ValuedNetwork) -> Result<Vec<f64>> {
    if !model.mode.is_valued() {
        return Err(Error::Model("binary-mode model evaluated on a valued network".into()));
    }
    if net.n() != model.n {
        return Err(Error::Model(format!("network has {} nodes, model compiled for {}", net.n(), model.n)));
    }
    let n = model.n;
    let mut out = Vec::with_capacity(model.stats.len());
    for stat in &model.stats {
        let value = match &stat.term {
            CompiledTerm::EdgesOrSum => {
                let mut acc = 0.0;
                for (i, j) in net.dyads() {
                    acc += f64::from(net.weight(i, j));
                }
                acc
            }
            CompiledTerm::Nonzero => net.edge_count() as f64,
            CompiledTerm::Dyadic(coef) => {
                let mut acc = 0.0;
                for (i, j) in net.dyads() {
                    let w = net.weight(i, j);
                    if w > 0 {
                        acc += f64::from(w) * coef[i * n + j];
                    }
                }
                acc
            }
            CompiledTerm::NodeSqrtCovar => {
                let mut acc = 0.0;
                for i in 0..n {
                    let mut s = 0.0;
                    let mut q = 0.0;
                    for j in 0..n {
                        if j != i {
                            let w = f64::from(net.weight(i, j));
                            s += w.sqrt();
                            q += w;
                        }
                    }
                    acc += (s * s - q) / 2.0;
                }
                acc
            }
            CompiledTerm::TransitiveWeights => transitive_weights_full(net),
            _ => unreachable!("binary-only terms rejected by validate()"),
        };
        out.push(value);
    }
    Ok(out)
}

/// Σ_{i<j} min(y_ij, max_{k≠i,j} min(y_ik, y_kj)).
fn transitive_weights_full(net: &ValuedNetwork) -> f64 {
    let n = net.n();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let w = net.weight(i, j);
            if w == 0 {
                continue;
            }
            acc += f64::from(two_path_strength(net, i, j, w));
        }
    }
    acc
}

/// min(cap, max_k min(y_ik, y_kj)), saturating early once the cap is reached.
fn two_path_strength(net: &ValuedNetwork, i: usize, j: usize, cap: u32) -> u32 {
    let n = net.n();
    let mut best = 0u32;
    for k in 0..n {
        if k == i || k == j {
            continue;
        }
        let t = net.weight(i, k).min(net.weight(k, j));
        if t > best {
            best = t;
            if best >= cap {
                return cap;
            }
        }
    }
    best.min(cap)
}

// ---------------------------------------------------------------------------
// Change statistics
// ---------------------------------------------------------------------------

/// g(y with y_ij = 1) − g(y with y_ij = 0), evaluated incrementally against
/// the current network state (whether or not the edge is present).
pub fn change_statistic_binary(
    model: &CompiledModel,
    net: &BinaryNetwork,
    dyad: (usize, usize),
) -> Result<Vec<f64>> {
    let (i, j) = check_dyad(model, dyad, net.n())?;
    let mut out = vec![0.0; model.stats.len()];
    binary_plus_delta_into(model, net.adjacency(), i, j, &mut out);
    Ok(out)
}

/// Incremental g(y_ij = 1) − g(y_ij = 0) for a binary model. Counts exclude
/// the (i, j) edge itself, so the result is valid whatever the dyad's current
/// state.
pub(crate) fn binary_plus_delta_into(
    model: &CompiledModel,
    adj: &BitMatrix,
    i: usize,
    j: usize,
    out: &mut [f64],
) {
    let n = model.n;
    let present = usize::from(adj.get(i, j));
    for (slot, stat) in out.iter_mut().zip(&model.stats) {
        *slot = match &stat.term {
            CompiledTerm::EdgesOrSum => 1.0,
            CompiledTerm::Dyadic(coef) => coef[i * n + j],
            CompiledTerm::GwDegree { u, .. } => {
                let di = adj.degree(i) - present;
                let dj = adj.degree(j) - present;
                u.powi(di as i32) + u.powi(dj as i32)
            }
            CompiledTerm::Gwesp { exp_decay, u } => {
                let common = adj.common_neighbor_ids(i, j);
                let mut acc = exp_decay * (1.0 - u.powi(common.len() as i32));
                for &k in &common {
                    let cik = adj.common_neighbors(i, k) - present;
                    let cjk = adj.common_neighbors(j, k) - present;
                    acc += u.powi(cik as i32) + u.powi(cjk as i32);
                }
                acc
            }
            _ => unreachable!("valued-only terms rejected by validate()"),
        };
    }
}

/// g(y with y_ij = v) − g(y), evaluated incrementally.
///
/// `sqrt_strengths`, when supplied, must hold Σ_k √y_ik per node for the
/// current state (samplers maintain this cache); otherwise the two affected
/// rows are scanned.
pub fn delta_valued(
    model: &CompiledModel,
    net: &ValuedNetwork,
    dyad: (usize, usize),
    new_value: u32,
) -> Result<Vec<f64>> {
    let (i, j) = check_dyad(model, dyad, net.n())?;
    let max = model.max_value();
    if new_value > max {
        return Err(Error::Model(format!("value {new_value} exceeds the model maximum {max}")));
    }
    let mut out = vec![0.0; model.stats.len()];
    valued_delta_into(model, net, i, j, new_value, None, &mut out);
    Ok(out)
}

pub(crate) fn valued_delta_into(
    model: &CompiledModel,
    net: &ValuedNetwork,
    i: usize,
    j: usize,
    new_value: u32,
    sqrt_strengths: Option<&[f64]>,
    out: &mut [f64],
) {
    let n = model.n;
    let w = net.weight(i, j);
    let dv = f64::from(new_value) - f64::from(w);
    for (slot, stat) in out.iter_mut().zip(&model.stats) {
        *slot = match &stat.term {
            CompiledTerm::EdgesOrSum => dv,
            CompiledTerm::Nonzero => f64::from(u8::from(new_value > 0)) - f64::from(u8::from(w > 0)),
            CompiledTerm::Dyadic(coef) => dv * coef[i * n + j],
            CompiledTerm::NodeSqrtCovar => {
                let sw = f64::from(w).sqrt();
                let sv = f64::from(new_value).sqrt();
                let (si, sj) = match sqrt_strengths {
                    Some(cache) => (cache[i], cache[j]),
                    None => (row_sqrt_strength(net, i), row_sqrt_strength(net, j)),
                };
                (sv - sw) * (si + sj - 2.0 * sw)
            }
            CompiledTerm::TransitiveWeights => transitive_weights_delta(net, i, j, new_value),
            _ => unreachable!("binary-only terms rejected by validate()"),
        };
    }
}

pub(crate) fn row_sqrt_strength(net: &ValuedNetwork, i: usize) -> f64 {
    let n = net.n();
    (0..n).map(|j| f64::from(net.weight(i, j)).sqrt()).sum()
}

/// Recomputes the transitivity contributions of every pair whose value can be
/// affected by setting y_ij := v: the dyad itself plus all pairs containing
/// i or j (their two-paths may route through the changed edge).
fn transitive_weights_delta(net: &ValuedNetwork, i: usize, j: usize, v: u32) -> f64 {
    let n = net.n();
    let old_w = net.weight(i, j);
    let weight = |a: usize, b: usize, value: u32| -> u32 {
        if (a == i && b == j) || (a == j && b == i) {
            value
        } else {
            net.weight(a, b)
        }
    };
    let contribution = |a: usize, b: usize, value: u32| -> f64 {
        let w_ab = weight(a, b, value);
        if w_ab == 0 {
            return 0.0;
        }
        let mut best = 0u32;
        for k in 0..n {
            if k == a || k == b {
                continue;
            }
            let t = weight(a, k, value).min(weight(k, b, value));
            if t > best {
                best = t;
                if best >= w_ab {
                    break;
                }
            }
        }
        f64::from(best.min(w_ab))
    };
    let mut delta = contribution(i, j, v) - contribution(i, j, old_w);
    for k in 0..n {
        if k == i || k == j {
            continue;
        }
        delta += contribution(i, k, v) - contribution(i, k, old_w);
        delta += contribution(j, k, v) - contribution(j, k, old_w);
    }
    delta
}

fn check_dyad(model: &CompiledModel, (i, j): (usize, usize), n: usize) -> Result<(usize, usize)> {
    if n != model.n {
        return Err(Error::Model(format!("network has {n} nodes, model compiled for {}", model.n)));
    }
    if i == j || i >= n || j >= n {
        return Err(Error::Model(format!("invalid dyad ({i},{j}) for {n} nodes")));
    }
    Ok((i, j))
}
