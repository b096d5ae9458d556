//! Metropolis-Hastings samplers over binary and count-valued networks, plus
//! exact enumeration oracles for tiny state spaces.
//!
//! Chains track model statistics incrementally and resynchronize against a
//! full recomputation on a fixed cadence to cancel floating-point drift.
//! Valued chains use the binomial reference measure Π C(max, y_ij), so a
//! sum-only model at θ = 0 reduces each dyad to Binomial(max, 1/2).

use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{BinaryNetwork, NodeSet, ValuedNetwork};
use crate::terms::{
    binary_plus_delta_into, eval_binary, eval_valued, row_sqrt_strength, valued_delta_into,
    CompiledModel, ModelMode,
};

/// Proposal kernel for binary chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BinaryProposal {
    /// Toggle a uniformly random dyad. Simple, symmetric.
    UniformDyad,
    /// Half the time toggle a uniformly random existing tie, half the time a
    /// uniformly random dyad; mixes well from sparse to dense regimes.
    #[default]
    TieNoTie,
}

/// Proposal kernel for valued chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValuedProposal {
    /// Pick a dyad and propose a uniform value in {0..max} \ {current}.
    #[default]
    UniformValue,
    /// Propose current ± 1 with equal probability; out-of-range moves are
    /// rejected in place.
    PlusMinusOne,
}

/// Chain layout: burn-in, spacing, retained draw count, and seeding.
#[derive(Debug, Clone)]
pub struct SamplerConfig {
    pub burn_in: usize,
    /// Steps between retained draws (≥ 1).
    pub interval: usize,
    /// Retained draws (≥ 1).
    pub sample_count: usize,
    pub seed: u64,
    /// Per-chain stream id; parallel chains take consecutive streams.
    pub stream: u64,
    pub binary_proposal: BinaryProposal,
    pub valued_proposal: ValuedProposal,
    /// Clone every retained network into the batch (needed by GOF).
    pub retain_networks: bool,
    /// Full statistic recomputation cadence, in steps.
    pub resync_every: usize,
}

impl SamplerConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            burn_in: 10_000,
            interval: 100,
            sample_count: 1_000,
            seed,
            stream: 0,
            binary_proposal: BinaryProposal::default(),
            valued_proposal: ValuedProposal::default(),
            retain_networks: false,
            resync_every: 100_000,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.interval < 1 {
            return Err(Error::Sampler("interval must be ≥ 1".into()));
        }
        if self.sample_count < 1 {
            return Err(Error::Sampler("sample_count must be ≥ 1".into()));
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Networks retained alongside the statistic draws.
#[derive(Debug, Clone)]
pub enum RetainedNetworks {
    None,
    Binary(Vec<BinaryNetwork>),
    Valued(Vec<ValuedNetwork>),
}

/// Output of one chain: retained statistic vectors plus bookkeeping.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub labels: Vec<String>,
    /// One row per retained draw.
    pub statistics: Vec<Vec<f64>>,
    pub networks: RetainedNetworks,
    pub acceptance_rate: f64,
}

impl SampleBatch {
    pub fn sample_count(&self) -> usize {
        self.statistics.len()
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// Column means across draws.
    pub fn means(&self) -> Vec<f64> {
        let p = self.dim();
        let mut out = vec![0.0; p];
        for row in &self.statistics {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        let s = self.statistics.len() as f64;
        out.iter_mut().for_each(|o| *o /= s);
        out
    }

    /// Column of one statistic across draws.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.statistics.iter().map(|row| row[k]).collect()
    }
}

fn check_theta(theta: &[f64], model: &CompiledModel) -> Result<()> {
    if theta.len() != model.dim() {
        return Err(Error::Sampler(format!(
            "theta has {} entries, model has {} statistics",
            theta.len(),
            model.dim()
        )));
    }
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::Sampler("theta must be finite".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Binary chain
// ---------------------------------------------------------------------------

struct BinaryChain<'a> {
    model: &'a CompiledModel,
    theta: &'a [f64],
    net: BinaryNetwork,
    stats: Vec<f64>,
    delta: Vec<f64>,
    /// Edge list plus O(1) position lookup for tie/no-tie proposals.
    edges: Vec<(u32, u32)>,
    edge_pos: Vec<u32>,
    n_dyads: f64,
    proposals: usize,
    accepted: usize,
}

const NO_EDGE: u32 = u32::MAX;

impl<'a> BinaryChain<'a> {
    fn new(model: &'a CompiledModel, theta: &'a [f64], start: BinaryNetwork) -> Self {
        let n = start.n();
        let stats = eval_binary(model, &start).expect("mode checked by caller");
        let mut edges = Vec::new();
        let mut edge_pos = vec![NO_EDGE; n * n];
        for (i, j) in start.edges() {
            edge_pos[i * n + j] = edges.len() as u32;
            edges.push((i as u32, j as u32));
        }
        let p = model.dim();
        Self {
            model,
            theta,
            net: start,
            stats,
            delta: vec![0.0; p],
            edges,
            edge_pos,
            n_dyads: (n * (n - 1) / 2) as f64,
            proposals: 0,
            accepted: 0,
        }
    }

    fn step(&mut self, rng: &mut ChaCha8Rng, proposal: BinaryProposal) {
        self.proposals += 1;
        let n = self.net.n();
        let (i, j) = match proposal {
            BinaryProposal::UniformDyad => random_dyad(rng, n),
            BinaryProposal::TieNoTie => {
                if rng.random::<bool>() {
                    // tie branch: toggle an existing edge; no-op on an empty graph
                    match self.edges.len() {
                        0 => return,
                        e => {
                            let (a, b) = self.edges[rng.random_range(0..e)];
                            (a as usize, b as usize)
                        }
                    }
                } else {
                    random_dyad(rng, n)
                }
            }
        };

        let present = self.net.has_edge(i, j);
        binary_plus_delta_into(self.model, self.net.adjacency(), i, j, &mut self.delta);
        let mut log_ratio: f64 = self.theta.iter().zip(&self.delta).map(|(t, d)| t * d).sum();
        if present {
            log_ratio = -log_ratio;
        }

        if proposal == BinaryProposal::TieNoTie {
            // Hastings correction for the asymmetric tie/no-tie kernel.
            let e = self.edges.len() as f64;
            log_ratio += if present {
                // removal: forward 0.5/E + 0.5/Nd, reverse 0.5/Nd
                -(self.n_dyads / e + 1.0).ln()
            } else {
                // addition: forward 0.5/Nd, reverse 0.5/(E+1) + 0.5/Nd
                (self.n_dyads / (e + 1.0) + 1.0).ln()
            };
        }

        if log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio {
            self.accepted += 1;
            self.net.set_edge(i, j, !present);
            let sign = if present { -1.0 } else { 1.0 };
            for (s, d) in self.stats.iter_mut().zip(&self.delta) {
                *s += sign * d;
            }
            let key = i * n + j;
            if present {
                let pos = self.edge_pos[key] as usize;
                let last = *self.edges.last().expect("edge list non-empty");
                self.edges.swap_remove(pos);
                self.edge_pos[key] = NO_EDGE;
                if pos < self.edges.len() {
                    self.edge_pos[last.0 as usize * n + last.1 as usize] = pos as u32;
                }
            } else {
                self.edge_pos[key] = self.edges.len() as u32;
                self.edges.push((i as u32, j as u32));
            }
        }
    }

    fn resync(&mut self) {
        self.stats = eval_binary(self.model, &self.net).expect("state stays valid");
    }
}

#[inline]
fn random_dyad(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let j = (i + rng.random_range(1..n)) % n;
    (i.min(j), i.max(j))
}

/// Runs a Metropolis-Hastings chain over simple graphs at fixed `theta`.
///
/// The chain starts from `start` (or the empty graph) and retains
/// `sample_count` statistic vectors. Deterministic given (seed, stream).
pub fn sample_binary(
    model: &CompiledModel,
    theta: &[f64],
    start: Option<&BinaryNetwork>,
    config: &SamplerConfig,
) -> Result<SampleBatch> {
    if model.mode().is_valued() {
        return Err(Error::Sampler("binary sampler needs a binary-mode model".into()));
    }
    config.validate()?;
    check_theta(theta, model)?;
    let n = model.n();
    if n < 2 {
        return Err(Error::Sampler("sampling needs at least two nodes".into()));
    }
    let start = match start {
        Some(net) => {
            if net.n() != n {
                return Err(Error::Sampler("start network size does not match the model".into()));
            }
            net.clone()
        }
        None => BinaryNetwork::empty(Arc::new(NodeSet::synthetic(n)), 0),
    };

    let mut rng = config.rng();
    let mut chain = BinaryChain::new(model, theta, start);
    let mut statistics = Vec::with_capacity(config.sample_count);
    let mut retained = Vec::new();
    let total = config.burn_in + config.interval * config.sample_count;
    for step in 1..=total {
        chain.step(&mut rng, config.binary_proposal);
        if step % config.resync_every == 0 {
            chain.resync();
        }
        if step > config.burn_in && (step - config.burn_in) % config.interval == 0 {
            statistics.push(chain.stats.clone());
            if config.retain_networks {
                retained.push(chain.net.clone());
            }
        }
    }

    Ok(SampleBatch {
        labels: model.labels(),
        statistics,
        networks: if config.retain_networks {
            RetainedNetworks::Binary(retained)
        } else {
            RetainedNetworks::None
        },
        acceptance_rate: chain.accepted as f64 / chain.proposals.max(1) as f64,
    })
}

// ---------------------------------------------------------------------------
// Valued chain
// ---------------------------------------------------------------------------

struct ValuedChain<'a> {
    model: &'a CompiledModel,
    theta: &'a [f64],
    net: ValuedNetwork,
    stats: Vec<f64>,
    delta: Vec<f64>,
    /// Σ_k √y_ik per node, maintained for the actor-heterogeneity term.
    sqrt_strength: Vec<f64>,
    /// log C(max, v) for v ∈ 0..=max.
    log_choose: Vec<f64>,
    max: u32,
    proposals: usize,
    accepted: usize,
}

impl<'a> ValuedChain<'a> {
    fn new(model: &'a CompiledModel, theta: &'a [f64], start: ValuedNetwork, max: u32) -> Self {
        let n = start.n();
        let stats = eval_valued(model, &start).expect("mode checked by caller");
        let sqrt_strength = (0..n).map(|i| row_sqrt_strength(&start, i)).collect();
        let log_choose = log_binomial_table(max);
        Self {
            model,
            theta,
            net: start,
            stats,
            delta: vec![0.0; model.dim()],
            sqrt_strength,
            log_choose,
            max,
            proposals: 0,
            accepted: 0,
        }
    }

    fn step(&mut self, rng: &mut ChaCha8Rng, proposal: ValuedProposal) {
        self.proposals += 1;
        let n = self.net.n();
        let (i, j) = random_dyad(rng, n);
        let w = self.net.weight(i, j);
        let v = match proposal {
            ValuedProposal::UniformValue => {
                let r = rng.random_range(0..self.max);
                if r >= w {
                    r + 1
                } else {
                    r
                }
            }
            ValuedProposal::PlusMinusOne => {
                if rng.random::<bool>() {
                    if w == self.max {
                        return;
                    }
                    w + 1
                } else {
                    if w == 0 {
                        return;
                    }
                    w - 1
                }
            }
        };

        valued_delta_into(self.model, &self.net, i, j, v, Some(&self.sqrt_strength), &mut self.delta);
        let log_ratio = self.theta.iter().zip(&self.delta).map(|(t, d)| t * d).sum::<f64>()
            + self.log_choose[v as usize]
            - self.log_choose[w as usize];

        if log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio {
            self.accepted += 1;
            self.net.set_weight(i, j, v);
            let ds = f64::from(v).sqrt() - f64::from(w).sqrt();
            self.sqrt_strength[i] += ds;
            self.sqrt_strength[j] += ds;
            for (s, d) in self.stats.iter_mut().zip(&self.delta) {
                *s += d;
            }
        }
    }

    fn resync(&mut self) {
        self.stats = eval_valued(self.model, &self.net).expect("state stays valid");
        for i in 0..self.net.n() {
            self.sqrt_strength[i] = row_sqrt_strength(&self.net, i);
        }
    }
}

/// log C(max, v) for v = 0..=max.
pub(crate) fn log_binomial_table(max: u32) -> Vec<f64> {
    let mut table = Vec::with_capacity(max as usize + 1);
    let mut acc = 0.0f64;
    table.push(0.0);
    for v in 1..=max {
        acc += f64::from(max - v + 1).ln() - f64::from(v).ln();
        table.push(acc);
    }
    table
}

/// Runs a Metropolis-Hastings chain over count-valued networks with the
/// binomial reference measure. Deterministic given (seed, stream).
pub fn sample_valued(
    model: &CompiledModel,
    theta: &[f64],
    start: Option<&ValuedNetwork>,
    config: &SamplerConfig,
) -> Result<SampleBatch> {
    let ModelMode::Valued { max } = model.mode() else {
        return Err(Error::Sampler("valued sampler needs a valued-mode model".into()));
    };
    if max < 1 {
        return Err(Error::Sampler("valued models need max ≥ 1".into()));
    }
    config.validate()?;
    check_theta(theta, model)?;
    let n = model.n();
    if n < 2 {
        return Err(Error::Sampler("sampling needs at least two nodes".into()));
    }
    let start = match start {
        Some(net) => {
            if net.n() != n {
                return Err(Error::Sampler("start network size does not match the model".into()));
            }
            if net.max_weight() > max {
                return Err(Error::Sampler("start network exceeds the model's maximum value".into()));
            }
            net.clone()
        }
        None => ValuedNetwork::empty(Arc::new(NodeSet::synthetic(n)), 0),
    };

    let mut rng = config.rng();
    let mut chain = ValuedChain::new(model, theta, start, max);
    let mut statistics = Vec::with_capacity(config.sample_count);
    let mut retained = Vec::new();
    let total = config.burn_in + config.interval * config.sample_count;
    for step in 1..=total {
        chain.step(&mut rng, config.valued_proposal);
        if step % config.resync_every == 0 {
            chain.resync();
        }
        if step > config.burn_in && (step - config.burn_in) % config.interval == 0 {
            statistics.push(chain.stats.clone());
            if config.retain_networks {
                retained.push(chain.net.clone());
            }
        }
    }

    Ok(SampleBatch {
        labels: model.labels(),
        statistics,
        networks: if config.retain_networks {
            RetainedNetworks::Valued(retained)
        } else {
            RetainedNetworks::None
        },
        acceptance_rate: chain.accepted as f64 / chain.proposals.max(1) as f64,
    })
}

// ---------------------------------------------------------------------------
// Exact enumeration
// ---------------------------------------------------------------------------

/// Exact moments of a model over its full state space.
#[derive(Debug, Clone)]
pub struct ExactMoments {
    /// log Σ_y h(y) exp(θᵀg(y)).
    pub log_normalizer: f64,
    pub mean: Vec<f64>,
    /// Row-major p×p covariance of the statistics.
    pub covariance: Vec<f64>,
}

/// Sums over every network configuration: all 2^C(n,2) graphs in binary mode
/// (n ≤ 6) or all (max+1)^C(n,2) weight assignments in valued mode (bounded
/// by 10^7 states). Used as a test oracle and for exact likelihoods.
pub fn enumerate_exact(model: &CompiledModel, theta: &[f64]) -> Result<ExactMoments> {
    check_theta(theta, model)?;
    let n = model.n();
    if n < 2 {
        return Err(Error::Sampler("enumeration needs at least two nodes".into()));
    }
    let dyads: Vec<(usize, usize)> =
        (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    match model.mode() {
        ModelMode::Binary => {
            if n > 6 {
                return Err(Error::StateSpaceTooLarge(format!("binary enumeration capped at n = 6, got {n}")));
            }
            let nodes = Arc::new(NodeSet::synthetic(n));
            let mut acc = MomentAccumulator::new(model.dim());
            let mut net = BinaryNetwork::empty(nodes, 0);
            let states = 1u64 << dyads.len();
            let mut prev_mask = 0u64;
            for mask in 0..states {
                // update only the flipped dyads
                let mut flip = mask ^ prev_mask;
                while flip != 0 {
                    let d = flip.trailing_zeros() as usize;
                    let (i, j) = dyads[d];
                    net.set_edge(i, j, (mask >> d) & 1 == 1);
                    flip &= flip - 1;
                }
                prev_mask = mask;
                let g = eval_binary(model, &net)?;
                let lw: f64 = theta.iter().zip(&g).map(|(t, v)| t * v).sum();
                acc.push(lw, &g);
            }
            Ok(acc.finish())
        }
        ModelMode::Valued { max } => {
            let states = (f64::from(max) + 1.0).powi(dyads.len() as i32);
            if !(states <= 1e7) {
                return Err(Error::StateSpaceTooLarge(format!(
                    "valued enumeration capped at 1e7 states, model needs {states:.3e}"
                )));
            }
            let nodes = Arc::new(NodeSet::synthetic(n));
            let log_choose = log_binomial_table(max);
            let mut acc = MomentAccumulator::new(model.dim());
            let mut net = ValuedNetwork::empty(nodes, 0);
            let mut digits = vec![0u32; dyads.len()];
            loop {
                let g = eval_valued(model, &net)?;
                let log_h: f64 = digits.iter().map(|&d| log_choose[d as usize]).sum();
                let lw: f64 = theta.iter().zip(&g).map(|(t, v)| t * v).sum::<f64>() + log_h;
                acc.push(lw, &g);

                // odometer increment
                let mut pos = 0;
                loop {
                    if pos == digits.len() {
                        return Ok(acc.finish());
                    }
                    let (i, j) = dyads[pos];
                    if digits[pos] < max {
                        digits[pos] += 1;
                        net.set_weight(i, j, digits[pos]);
                        break;
                    }
                    digits[pos] = 0;
                    net.set_weight(i, j, 0);
                    pos += 1;
                }
            }
        }
    }
}

/// Online accumulator for Σw, Σw·g, Σw·ggᵀ with running max-rescaling so the
/// weights never overflow.
struct MomentAccumulator {
    p: usize,
    log_max: f64,
    z: f64,
    s: Vec<f64>,
    q: Vec<f64>,
}

impl MomentAccumulator {
    fn new(p: usize) -> Self {
        Self { p, log_max: f64::NEG_INFINITY, z: 0.0, s: vec![0.0; p], q: vec![0.0; p * p] }
    }

    fn push(&mut self, lw: f64, g: &[f64]) {
        if lw > self.log_max {
            let scale = if self.log_max.is_finite() { (self.log_max - lw).exp() } else { 0.0 };
            self.z *= scale;
            self.s.iter_mut().for_each(|v| *v *= scale);
            self.q.iter_mut().for_each(|v| *v *= scale);
            self.log_max = lw;
        }
        let w = (lw - self.log_max).exp();
        self.z += w;
        for k in 0..self.p {
            self.s[k] += w * g[k];
            for l in 0..self.p {
                self.q[k * self.p + l] += w * g[k] * g[l];
            }
        }
    }

    fn finish(self) -> ExactMoments {
        let mean: Vec<f64> = self.s.iter().map(|v| v / self.z).collect();
        let mut covariance = vec![0.0; self.p * self.p];
        for k in 0..self.p {
            for l in 0..self.p {
                covariance[k * self.p + l] = self.q[k * self.p + l] / self.z - mean[k] * mean[l];
            }
        }
        ExactMoments { log_normalizer: self.log_max + self.z.ln(), mean, covariance }
    }
}

// ---------------------------------------------------------------------------
// Monte-Carlo standard errors
// ---------------------------------------------------------------------------

/// Batch-means standard error of the mean of a (possibly autocorrelated)
/// chain of draws.
pub fn batch_means_se(samples: &[f64]) -> f64 {
    let s = samples.len();
    if s < 4 {
        let mean = samples.iter().sum::<f64>() / s.max(1) as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (s.max(2) - 1) as f64;
        return (var / s as f64).sqrt();
    }
    let b = (s as f64).sqrt().floor() as usize;
    let nb = s / b;
    let used = nb * b;
    let mean = samples[..used].iter().sum::<f64>() / used as f64;
    let mut var_b = 0.0;
    for block in samples[..used].chunks_exact(b) {
        let bm = block.iter().sum::<f64>() / b as f64;
        var_b += (bm - mean).powi(2);
    }
    var_b /= (nb - 1) as f64;
    (var_b / nb as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::{compile, ModelData, ModelSpec, TermSpec};
    use approx::assert_abs_diff_eq;

    fn logistic(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    fn edges_model(n: usize) -> CompiledModel {
        compile(&ModelSpec::binary(vec![TermSpec::Edges]), n, &ModelData::new()).unwrap()
    }

    fn sum_model(n: usize, max: u32) -> CompiledModel {
        compile(&ModelSpec::valued(max, vec![TermSpec::Sum]), n, &ModelData::new()).unwrap()
    }

    #[test]
    fn enumeration_edge_expectations() {
        // n=3 binary, edges-only θ=0 → E[edges] = 1.5
        let m3 = enumerate_exact(&edges_model(3), &[0.0]).unwrap();
        assert_abs_diff_eq!(m3.mean[0], 1.5, epsilon = 1e-12);
        // n=4 → 3.0
        let m4 = enumerate_exact(&edges_model(4), &[0.0]).unwrap();
        assert_abs_diff_eq!(m4.mean[0], 3.0, epsilon = 1e-12);
        // valued max=1 sum-only θ=0 reduces to the binary case
        let v3 = enumerate_exact(&sum_model(3, 1), &[0.0]).unwrap();
        assert_abs_diff_eq!(v3.mean[0], 1.5, epsilon = 1e-12);
        // nonzero θ: E[edges] = Nd · logistic(θ)
        let m = enumerate_exact(&edges_model(4), &[0.8]).unwrap();
        assert_abs_diff_eq!(m.mean[0], 6.0 * logistic(0.8), epsilon = 1e-10);
        // normalizer for edges-only θ: (1 + e^θ)^Nd
        assert_abs_diff_eq!(m.log_normalizer, 6.0 * 0.8f64.exp().ln_1p(), epsilon = 1e-10);
    }

    #[test]
    fn enumeration_guards_state_space() {
        assert!(matches!(enumerate_exact(&edges_model(7), &[0.0]), Err(Error::StateSpaceTooLarge(_))));
        let big = sum_model(8, 5);
        assert!(matches!(enumerate_exact(&big, &[0.0]), Err(Error::StateSpaceTooLarge(_))));
    }

    #[test]
    fn binary_sampler_matches_logistic_distribution() {
        for (theta, proposal) in [
            (0.0, BinaryProposal::UniformDyad),
            (0.0, BinaryProposal::TieNoTie),
            (0.7, BinaryProposal::TieNoTie),
            (-1.2, BinaryProposal::UniformDyad),
        ] {
            let n = 8;
            let model = edges_model(n);
            let mut config = SamplerConfig::new(42);
            config.binary_proposal = proposal;
            config.burn_in = 5_000;
            config.interval = 20;
            config.sample_count = 4_000;
            let batch = sample_binary(&model, &[theta], None, &config).unwrap();
            let col = batch.column(0);
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let se = batch_means_se(&col);
            let expect = (n * (n - 1) / 2) as f64 * logistic(theta);
            assert!(
                (mean - expect).abs() < 3.0 * se.max(1e-3),
                "theta={theta} proposal={proposal:?}: mean {mean} vs expected {expect} (se {se})"
            );
            if theta != 0.0 {
                assert!(batch.acceptance_rate > 0.0 && batch.acceptance_rate < 1.0);
            }
        }
    }

    #[test]
    fn binary_sampler_matches_enumeration_with_gwesp() {
        let n = 5;
        let data = ModelData::new();
        let model = compile(
            &ModelSpec::binary(vec![TermSpec::Edges, TermSpec::Gwesp { decay: 0.25 }]),
            n,
            &data,
        )
        .unwrap();
        for (seed, theta) in [(1u64, [-0.4, 0.3]), (2, [0.5, -0.2])] {
            let exact = enumerate_exact(&model, &theta).unwrap();
            let mut config = SamplerConfig::new(seed);
            config.burn_in = 10_000;
            config.interval = 25;
            config.sample_count = 6_000;
            let batch = sample_binary(&model, &theta, None, &config).unwrap();
            for k in 0..model.dim() {
                let col = batch.column(k);
                let mean = col.iter().sum::<f64>() / col.len() as f64;
                let se = batch_means_se(&col);
                assert!(
                    (mean - exact.mean[k]).abs() < 3.0 * se.max(1e-3),
                    "stat {k}: {mean} vs {} (se {se})",
                    exact.mean[k]
                );
            }
        }
    }

    #[test]
    fn valued_sampler_recovers_binomial_reference() {
        // sum-only θ=0, max=5 → dyad values Binomial(5, 0.5)
        let n = 6;
        let model = sum_model(n, 5);
        let mut config = SamplerConfig::new(7);
        config.burn_in = 5_000;
        config.interval = 20;
        config.sample_count = 4_000;
        let batch = sample_valued(&model, &[0.0], None, &config).unwrap();
        let col = batch.column(0);
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let se = batch_means_se(&col);
        let dyads = (n * (n - 1) / 2) as f64;
        assert!((mean - dyads * 2.5).abs() < 3.0 * se.max(1e-3), "mean {mean} vs {}", dyads * 2.5);

        // nonzero θ: mean dyad value = max · logistic(θ)
        let theta = 0.6;
        let batch = sample_valued(&model, &[theta], None, &config).unwrap();
        let col = batch.column(0);
        let mean = col.iter().sum::<f64>() / col.len() as f64 / dyads;
        let se = batch_means_se(&col) / dyads;
        assert!((mean - 5.0 * logistic(theta)).abs() < 3.0 * se.max(1e-3));
    }

    #[test]
    fn valued_sampler_matches_enumeration_sum_nonzero() {
        let n = 4;
        let max = 2;
        let model = compile(
            &ModelSpec::valued(max, vec![TermSpec::Sum, TermSpec::Nonzero]),
            n,
            &ModelData::new(),
        )
        .unwrap();
        for (seed, theta, proposal) in [
            (11u64, [-0.5, 0.8], ValuedProposal::UniformValue),
            (12, [0.3, -0.6], ValuedProposal::PlusMinusOne),
        ] {
            let exact = enumerate_exact(&model, &theta).unwrap();
            let mut config = SamplerConfig::new(seed);
            config.valued_proposal = proposal;
            config.burn_in = 10_000;
            config.interval = 20;
            config.sample_count = 6_000;
            let batch = sample_valued(&model, &theta, None, &config).unwrap();
            for k in 0..model.dim() {
                let col = batch.column(k);
                let mean = col.iter().sum::<f64>() / col.len() as f64;
                let se = batch_means_se(&col);
                assert!(
                    (mean - exact.mean[k]).abs() < 3.0 * se.max(1e-3),
                    "stat {k} proposal {proposal:?}: {mean} vs {} (se {se})",
                    exact.mean[k]
                );
            }
        }
    }

    #[test]
    fn chain_state_matches_exact_distribution() {
        // detailed-balance spot check: empirical state distribution of a long
        // chain over the 8 graphs on 3 nodes vs exact probabilities
        let n = 3;
        let model = compile(
            &ModelSpec::binary(vec![TermSpec::Edges, TermSpec::Gwesp { decay: 0.25 }]),
            n,
            &ModelData::new(),
        )
        .unwrap();
        let theta = [0.4, 0.5];

        // exact probabilities per dyad mask
        let dyads = [(0usize, 1usize), (0, 2), (1, 2)];
        let nodes = Arc::new(NodeSet::synthetic(n));
        let mut log_w = Vec::new();
        for mask in 0..8u32 {
            let mut net = BinaryNetwork::empty(Arc::clone(&nodes), 0);
            for (d, &(i, j)) in dyads.iter().enumerate() {
                if (mask >> d) & 1 == 1 {
                    net.set_edge(i, j, true);
                }
            }
            let g = eval_binary(&model, &net).unwrap();
            log_w.push(theta.iter().zip(&g).map(|(t, v)| t * v).sum::<f64>());
        }
        let m = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = log_w.iter().map(|lw| (lw - m).exp()).sum();
        let exact: Vec<f64> = log_w.iter().map(|lw| (lw - m).exp() / z).collect();

        for proposal in [BinaryProposal::UniformDyad, BinaryProposal::TieNoTie] {
            let mut config = SamplerConfig::new(99);
            config.binary_proposal = proposal;
            config.burn_in = 10_000;
            config.interval = 1;
            config.sample_count = 1_000_000;
            config.retain_networks = true;
            let batch = sample_binary(&model, &theta, None, &config).unwrap();
            let RetainedNetworks::Binary(nets) = &batch.networks else { panic!() };
            let mut counts = vec![0usize; 8];
            for net in nets {
                let mut mask = 0usize;
                for (d, &(i, j)) in dyads.iter().enumerate() {
                    if net.has_edge(i, j) {
                        mask |= 1 << d;
                    }
                }
                counts[mask] += 1;
            }
            let total: usize = counts.iter().sum();
            let tv: f64 = counts
                .iter()
                .zip(&exact)
                .map(|(c, p)| (*c as f64 / total as f64 - p).abs())
                .sum::<f64>()
                / 2.0;
            assert!(tv < 0.02, "total variation {tv} too large for {proposal:?}");
        }
    }

    #[test]
    fn identical_seeds_reproduce_bit_identical_batches() {
        let model = edges_model(8);
        let config = SamplerConfig::new(1234);
        let a = sample_binary(&model, &[-0.3], None, &config).unwrap();
        let b = sample_binary(&model, &[-0.3], None, &config).unwrap();
        assert_eq!(a.statistics, b.statistics);
        assert_eq!(a.acceptance_rate, b.acceptance_rate);

        let mut other = SamplerConfig::new(1234);
        other.stream = 1;
        let c = sample_binary(&model, &[-0.3], None, &other).unwrap();
        assert_ne!(a.statistics, c.statistics);

        let vm = sum_model(5, 3);
        let va = sample_valued(&vm, &[0.2], None, &config).unwrap();
        let vb = sample_valued(&vm, &[0.2], None, &config).unwrap();
        assert_eq!(va.statistics, vb.statistics);
    }

    #[test]
    fn tracked_statistics_do_not_drift() {
        // run with resync disabled and compare tracked statistics against a
        // full recomputation of every retained network
        let n = 12;
        let data = {
            let mut d = ModelData::new();
            d.numeric.insert("x".into(), (0..n).map(|i| (i as f64) / (n as f64)).collect());
            d
        };
        let model = compile(
            &ModelSpec::binary(vec![
                TermSpec::Edges,
                TermSpec::Absdiff { attr: "x".into() },
                TermSpec::Gwdegree { decay: 0.5 },
                TermSpec::Gwesp { decay: 0.25 },
            ]),
            n,
            &data,
        )
        .unwrap();
        let mut config = SamplerConfig::new(5);
        config.burn_in = 0;
        config.interval = 1_000;
        config.sample_count = 50;
        config.retain_networks = true;
        config.resync_every = usize::MAX;
        let batch = sample_binary(&model, &[-0.5, -0.4, 0.2, 0.1], None, &config).unwrap();
        let RetainedNetworks::Binary(nets) = &batch.networks else { panic!() };
        for (row, net) in batch.statistics.iter().zip(nets) {
            let fresh = eval_binary(&model, net).unwrap();
            for k in 0..model.dim() {
                assert_abs_diff_eq!(row[k], fresh[k], epsilon = 1e-6);
            }
        }

        // valued chain, same drift guard
        let vdata = ModelData::new();
        let vmodel = compile(
            &ModelSpec::valued(4, vec![TermSpec::Sum, TermSpec::Nonzero, TermSpec::Nodesqrtcovar]),
            n,
            &vdata,
        )
        .unwrap();
        let mut vconfig = config.clone();
        vconfig.sample_count = 30;
        let vbatch = sample_valued(&vmodel, &[-0.8, 0.4, 0.05], None, &vconfig).unwrap();
        let RetainedNetworks::Valued(vnets) = &vbatch.networks else { panic!() };
        for (row, net) in vbatch.statistics.iter().zip(vnets) {
            let fresh = eval_valued(&vmodel, net).unwrap();
            for k in 0..vmodel.dim() {
                assert_abs_diff_eq!(row[k], fresh[k], epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn sampler_input_validation() {
        let model = edges_model(5);
        let config = SamplerConfig::new(1);
        assert!(sample_binary(&model, &[f64::NAN], None, &config).is_err());
        assert!(sample_binary(&model, &[0.0, 1.0], None, &config).is_err());
        let mut bad = SamplerConfig::new(1);
        bad.interval = 0;
        assert!(sample_binary(&model, &[0.0], None, &bad).is_err());
        let vm = sum_model(4, 3);
        assert!(sample_binary(&vm, &[0.0], None, &config).is_err());
        assert!(sample_valued(&model, &[0.0], None, &config).is_err());
    }
}
