//! Parameter estimation: maximum pseudolikelihood for binary networks,
//! slice-bootstrapped temporal models, Monte-Carlo maximum likelihood for
//! valued networks, and multicollinearity diagnostics.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};
use crate::graph::{AttributePanel, BinaryNetwork, EdgeCovariateMatrix, ValuedNetwork};
use crate::sampler::{enumerate_exact, sample_valued, SampleBatch, SamplerConfig};
use crate::terms::{
    change_statistic_binary, compile, delta_valued, eval_valued, CompiledModel, ModelData,
    ModelSpec,
};

/// Per-coefficient uncertainty, following one of the two reporting styles.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Inference {
    /// Standard errors with Wald p-values and significance stars.
    Wald { std_errors: Vec<f64>, p_values: Vec<f64>, stars: Vec<String> },
    /// Bootstrap means with confidence intervals; `significant` is true when
    /// the interval excludes zero.
    Bootstrap {
        mean: Vec<f64>,
        ci_low: Vec<f64>,
        ci_high: Vec<f64>,
        significant: Vec<bool>,
        replicates: usize,
        dropped: usize,
    },
    None,
}

/// Convergence and sampler bookkeeping attached to a fit.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Per-statistic (sampled mean − observed) / sampled sd at the final iterate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_ratios: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acceptance_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_count: Option<usize>,
    pub ridge_used: bool,
    pub separation_suspected: bool,
    pub notes: Vec<String>,
}

/// Estimated coefficients with uncertainty and convergence metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub labels: Vec<String>,
    pub estimates: Vec<f64>,
    pub inference: Inference,
    pub converged: bool,
    pub iterations: usize,
    pub diagnostics: FitDiagnostics,
}

impl FitResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn wald_inference(estimates: &[f64], std_errors: Vec<f64>) -> Inference {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let p_values: Vec<f64> = estimates
        .iter()
        .zip(&std_errors)
        .map(|(est, se)| {
            if *se > 0.0 && se.is_finite() {
                2.0 * (1.0 - normal.cdf((est / se).abs()))
            } else {
                f64::NAN
            }
        })
        .collect();
    let stars = p_values.iter().map(|&p| significance_stars(p)).collect();
    Inference::Wald { std_errors, p_values, stars }
}

/// Star convention: *** p < 0.001, ** p < 0.01, * p < 0.05.
pub fn significance_stars(p: f64) -> String {
    if !p.is_finite() {
        String::new()
    } else if p < 0.001 {
        "***".into()
    } else if p < 0.01 {
        "**".into()
    } else if p < 0.05 {
        "*".into()
    } else {
        String::new()
    }
}

// ---------------------------------------------------------------------------
// Logistic Newton core (shared by MPLE and the temporal pooled fit)
// ---------------------------------------------------------------------------

const MPLE_TOL: f64 = 1e-8;
const MPLE_MAX_ITER: usize = 100;
const NEWTON_STEP_CAP: f64 = 5.0;
const SEPARATION_THETA: f64 = 30.0;

struct LogisticOutcome {
    theta: Vec<f64>,
    converged: bool,
    iterations: usize,
    /// Inverse Hessian at the optimum (asymptotic covariance), when available.
    covariance: Option<DMatrix<f64>>,
    ridge_used: bool,
    separation_suspected: bool,
}

/// Newton-Raphson on the logistic log-likelihood Σ y·η − log(1 + e^η),
/// η = θᵀx.
fn logistic_newton(design: &DMatrix<f64>, response: &DVector<f64>) -> LogisticOutcome {
    let p = design.ncols();
    let mut theta = DVector::zeros(p);
    let mut ridge_used = false;
    let mut iterations = 0;
    let mut converged = false;

    for iter in 1..=MPLE_MAX_ITER {
        iterations = iter;
        let eta = design * &theta;
        let probs = eta.map(|e| 1.0 / (1.0 + (-e).exp()));
        let resid = response - &probs;
        let grad = design.transpose() * &resid;
        if grad.amax() < MPLE_TOL {
            converged = true;
            break;
        }
        let weights = probs.map(|pr| pr * (1.0 - pr));
        let mut weighted = design.clone();
        for (mut row, w) in weighted.row_iter_mut().zip(weights.iter()) {
            row *= *w;
        }
        let mut hessian = design.transpose() * weighted;
        let mut step = match hessian.clone().cholesky() {
            Some(ch) => ch.solve(&grad),
            None => {
                ridge_used = true;
                let scale = hessian.trace().abs().max(1.0) / p as f64;
                for d in 0..p {
                    hessian[(d, d)] += 1e-6 * scale;
                }
                match hessian.clone().cholesky() {
                    Some(ch) => ch.solve(&grad),
                    None => break,
                }
            }
        };
        let norm = step.norm();
        if norm > NEWTON_STEP_CAP {
            step *= NEWTON_STEP_CAP / norm;
        }
        theta += step;
    }

    let separation_suspected = !converged && theta.amax() > SEPARATION_THETA;
    let covariance = {
        let eta = design * &theta;
        let weights = eta.map(|e| {
            let pr = 1.0 / (1.0 + (-e).exp());
            pr * (1.0 - pr)
        });
        let mut weighted = design.clone();
        for (mut row, w) in weighted.row_iter_mut().zip(weights.iter()) {
            row *= *w;
        }
        (design.transpose() * weighted).try_inverse()
    };

    LogisticOutcome {
        theta: theta.data.into(),
        converged,
        iterations,
        covariance,
        ridge_used,
        separation_suspected,
    }
}

/// Change-statistic design matrix and response for one binary network.
fn mple_rows(model: &CompiledModel, net: &BinaryNetwork) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = model.dim();
    let n = net.n();
    let mut design = Vec::with_capacity(n * (n - 1) / 2 * p);
    let mut response = Vec::with_capacity(n * (n - 1) / 2);
    for (i, j) in net.dyads() {
        let delta = change_statistic_binary(model, net, (i, j))?;
        design.extend_from_slice(&delta);
        response.push(f64::from(u8::from(net.has_edge(i, j))));
    }
    Ok((design, response))
}

/// Maximum pseudolikelihood for a binary model: logistic regression of each
/// dyad's state on its change statistics. Exact MLE for dyad-independent
/// models; Wald standard errors come from the inverse pseudolikelihood
/// Hessian.
pub fn fit_mple(spec: &ModelSpec, net: &BinaryNetwork, data: &ModelData) -> Result<FitResult> {
    if spec.mode.is_valued() {
        return Err(Error::Estimation("fit_mple expects a binary-mode model".into()));
    }
    let model = compile(spec, net.n(), data)?;
    if model.dim() == 0 {
        return Err(Error::Estimation("model has no statistics".into()));
    }
    let (design_flat, response) = mple_rows(&model, net)?;
    let rows = response.len();
    let design = DMatrix::from_row_slice(rows, model.dim(), &design_flat);
    let outcome = logistic_newton(&design, &DVector::from_vec(response));

    let std_errors = outcome
        .covariance
        .as_ref()
        .map(|cov| (0..model.dim()).map(|k| cov[(k, k)].max(0.0).sqrt()).collect())
        .unwrap_or_else(|| vec![f64::NAN; model.dim()]);
    let mut diagnostics = FitDiagnostics {
        ridge_used: outcome.ridge_used,
        separation_suspected: outcome.separation_suspected,
        ..Default::default()
    };
    if outcome.separation_suspected {
        diagnostics.notes.push("perfect separation suspected: estimates diverged".into());
    }
    Ok(FitResult {
        labels: model.labels(),
        inference: wald_inference(&outcome.theta, std_errors),
        estimates: outcome.theta,
        converged: outcome.converged,
        iterations: outcome.iterations,
        diagnostics,
    })
}

// ---------------------------------------------------------------------------
// Temporal bootstrap
// ---------------------------------------------------------------------------

/// Confidence-interval recipe for the slice bootstrap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CiRecipe {
    /// Plain percentile interval of the replicate distribution. Anticonservative
    /// when few time slices are available.
    Percentile,
    /// Bootstrap mean ± t(1−α/2, S−1) · sd · √(S/(S−1)) where S is the slice
    /// count; corrects the small-sample narrowing of the slice bootstrap.
    #[default]
    TScaled,
}

#[derive(Debug, Clone)]
pub struct TergmOptions {
    pub replications: usize,
    pub seed: u64,
    pub ci_recipe: CiRecipe,
    /// Two-sided confidence level, default 0.95.
    pub confidence: f64,
}

impl TergmOptions {
    pub fn new(replications: usize, seed: u64) -> Self {
        Self { replications, seed, ci_recipe: CiRecipe::default(), confidence: 0.95 }
    }
}

/// Replicate-level output of the temporal bootstrap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub labels: Vec<String>,
    /// Pooled point estimate on the full series.
    pub point: Vec<f64>,
    /// R × p replicate coefficient matrix (kept replicates only).
    pub replicates: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub significant: Vec<bool>,
    pub dropped_replicates: usize,
    pub ci_recipe: CiRecipe,
    pub point_converged: bool,
}

impl BootstrapResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_fit_result(&self) -> FitResult {
        FitResult {
            labels: self.labels.clone(),
            estimates: self.mean.clone(),
            inference: Inference::Bootstrap {
                mean: self.mean.clone(),
                ci_low: self.ci_low.clone(),
                ci_high: self.ci_high.clone(),
                significant: self.significant.clone(),
                replicates: self.replicates.len(),
                dropped: self.dropped_replicates,
            },
            converged: self.point_converged,
            iterations: 0,
            diagnostics: FitDiagnostics::default(),
        }
    }
}

struct TransitionSlice {
    design: Vec<f64>,
    response: Vec<f64>,
}

/// Pooled pseudolikelihood over the transitions of a binary network series
/// with slice-resampling bootstrap intervals.
///
/// Transition t (t = 1..T−1) regresses network t's dyad states on change
/// statistics computed with that year's attributes, the previous network as
/// the memory covariate, and the 1-based transition index as the time trend.
/// Bootstrap replicates refit the pooled model on T−1 slices drawn with
/// replacement; replicates whose refit fails numerically are dropped and
/// counted.
pub fn fit_tergm_bootstrap(
    series: &[BinaryNetwork],
    spec: &ModelSpec,
    panel: &AttributePanel,
    covariates: &[EdgeCovariateMatrix],
    options: &TergmOptions,
) -> Result<BootstrapResult> {
    if spec.mode.is_valued() {
        return Err(Error::Estimation("temporal fits expect a binary-mode model".into()));
    }
    if series.len() < 2 {
        return Err(Error::Estimation(
            "temporal fits need at least 2 periods (the first is consumed by the lag)".into(),
        ));
    }
    if options.replications < 1 {
        return Err(Error::Estimation("bootstrap needs at least 1 replication".into()));
    }
    let n = series[0].n();
    if series.iter().any(|net| net.n() != n) {
        return Err(Error::Estimation("series networks must share one node set".into()));
    }

    // Per-transition change-statistic slices.
    let mut labels: Option<Vec<String>> = None;
    let mut slices = Vec::with_capacity(series.len() - 1);
    for t in 1..series.len() {
        let response_net = &series[t];
        let mut data = ModelData::from_panel_year(panel, response_net.year())?;
        for cov in covariates {
            data.add_covariate(cov);
        }
        data.set_memory(&series[t - 1]);
        data.set_time_index(t as f64);
        let model = compile(spec, n, &data)?;
        match &labels {
            None => labels = Some(model.labels()),
            Some(existing) => {
                if *existing != model.labels() {
                    return Err(Error::Estimation(
                        "statistic labels differ across periods (factor levels must be stable)".into(),
                    ));
                }
            }
        }
        let (design, response) = mple_rows(&model, response_net)?;
        slices.push(TransitionSlice { design, response });
    }
    let labels = labels.expect("at least one transition");
    let p = labels.len();

    let pooled_fit = fit_pooled(&slices, &(0..slices.len()).collect::<Vec<_>>(), p)
        .ok_or_else(|| Error::Estimation("pooled pseudolikelihood fit failed".into()))?;

    // Bootstrap over transition slices, deterministic per replicate index.
    let s = slices.len();
    let replicate_results: Vec<Option<Vec<f64>>> = (0..options.replications)
        .into_par_iter()
        .map(|r| {
            use rand::prelude::*;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(options.seed);
            rng.set_stream(r as u64 + 1);
            let ids: Vec<usize> = (0..s).map(|_| rng.random_range(0..s)).collect();
            fit_pooled(&slices, &ids, p).map(|o| o.theta)
        })
        .collect();

    let mut replicates = Vec::with_capacity(options.replications);
    let mut dropped = 0;
    for rep in replicate_results {
        match rep {
            Some(theta) => replicates.push(theta),
            None => dropped += 1,
        }
    }
    if replicates.is_empty() {
        return Err(Error::Estimation("every bootstrap replicate failed to refit".into()));
    }

    let mean: Vec<f64> = (0..p)
        .map(|k| replicates.iter().map(|r| r[k]).sum::<f64>() / replicates.len() as f64)
        .collect();
    let (ci_low, ci_high) = bootstrap_ci(&replicates, &mean, s, options);
    let significant: Vec<bool> =
        ci_low.iter().zip(&ci_high).map(|(lo, hi)| !(*lo <= 0.0 && 0.0 <= *hi)).collect();

    Ok(BootstrapResult {
        labels,
        point: pooled_fit.theta,
        replicates,
        mean,
        ci_low,
        ci_high,
        significant,
        dropped_replicates: dropped,
        ci_recipe: options.ci_recipe,
        point_converged: pooled_fit.converged,
    })
}

fn fit_pooled(slices: &[TransitionSlice], ids: &[usize], p: usize) -> Option<LogisticOutcome> {
    let rows: usize = ids.iter().map(|&i| slices[i].response.len()).sum();
    let mut design_flat = Vec::with_capacity(rows * p);
    let mut response = Vec::with_capacity(rows);
    for &i in ids {
        design_flat.extend_from_slice(&slices[i].design);
        response.extend_from_slice(&slices[i].response);
    }
    let design = DMatrix::from_row_slice(rows, p, &design_flat);
    let outcome = logistic_newton(&design, &DVector::from_vec(response));
    if outcome.theta.iter().all(|t| t.is_finite()) {
        Some(outcome)
    } else {
        None
    }
}

fn bootstrap_ci(
    replicates: &[Vec<f64>],
    mean: &[f64],
    slice_count: usize,
    options: &TergmOptions,
) -> (Vec<f64>, Vec<f64>) {
    let p = mean.len();
    let r = replicates.len();
    let alpha = 1.0 - options.confidence;
    if r < 2 {
        return (mean.to_vec(), mean.to_vec());
    }
    match options.ci_recipe {
        CiRecipe::Percentile => {
            let mut low = Vec::with_capacity(p);
            let mut high = Vec::with_capacity(p);
            for k in 0..p {
                let mut col: Vec<f64> = replicates.iter().map(|row| row[k]).collect();
                col.sort_by(|a, b| a.partial_cmp(b).expect("finite replicates"));
                low.push(quantile_sorted(&col, alpha / 2.0));
                high.push(quantile_sorted(&col, 1.0 - alpha / 2.0));
            }
            (low, high)
        }
        CiRecipe::TScaled => {
            let df = (slice_count.max(2) - 1) as f64;
            let t = StudentsT::new(0.0, 1.0, df).expect("valid dof").inverse_cdf(1.0 - alpha / 2.0);
            let inflate = (slice_count as f64 / df).sqrt();
            let mut low = Vec::with_capacity(p);
            let mut high = Vec::with_capacity(p);
            for k in 0..p {
                let var = replicates.iter().map(|row| (row[k] - mean[k]).powi(2)).sum::<f64>()
                    / (r - 1) as f64;
                let width = t * inflate * var.sqrt();
                low.push(mean[k] - width);
                high.push(mean[k] + width);
            }
            (low, high)
        }
    }
}

/// Linear-interpolation quantile of an ascending-sorted slice.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

// ---------------------------------------------------------------------------
// Valued pseudolikelihood (also the MC-MLE initializer)
// ---------------------------------------------------------------------------

struct ValuedPseudoRows {
    /// Per dyad: (max+1) × p change statistics relative to value 0.
    deltas: Vec<Vec<f64>>,
    /// Observed value per dyad.
    observed: Vec<u32>,
    log_choose: Vec<f64>,
}

fn valued_pseudo_rows(model: &CompiledModel, net: &ValuedNetwork) -> Result<ValuedPseudoRows> {
    let p = model.dim();
    let max = model.max_value();
    let mut deltas = Vec::new();
    let mut observed = Vec::new();
    for (i, j) in net.dyads() {
        // d(v) = g(y_ij = v) − g(y_ij = 0), from deltas against the current value
        let base = delta_valued(model, net, (i, j), 0)?;
        let mut rows = vec![0.0; (max as usize + 1) * p];
        for v in 1..=max {
            let dv = delta_valued(model, net, (i, j), v)?;
            for k in 0..p {
                rows[v as usize * p + k] = dv[k] - base[k];
            }
        }
        deltas.push(rows);
        observed.push(net.weight(i, j));
    }
    Ok(ValuedPseudoRows { deltas, observed, log_choose: crate::sampler::log_binomial_table(max) })
}

struct ValuedPseudoOutcome {
    theta: Vec<f64>,
    converged: bool,
    iterations: usize,
    ridge_used: bool,
}

/// Newton on the conditional log-likelihood Σ_d [log h(y_d) + θᵀd(y_d) −
/// log Σ_v h(v) exp(θᵀd(v))] with the binomial reference h.
fn valued_pseudo_newton(rows: &ValuedPseudoRows, p: usize) -> ValuedPseudoOutcome {
    let max = rows.log_choose.len() - 1;
    let mut theta = DVector::<f64>::zeros(p);
    let mut converged = false;
    let mut iterations = 0;
    let mut ridge_used = false;

    for iter in 1..=MPLE_MAX_ITER {
        iterations = iter;
        let mut grad = DVector::<f64>::zeros(p);
        let mut hess = DMatrix::<f64>::zeros(p, p);
        for (delta_rows, &y) in rows.deltas.iter().zip(&rows.observed) {
            // softmax over values
            let mut logits = Vec::with_capacity(max + 1);
            for v in 0..=max {
                let mut acc = rows.log_choose[v];
                for k in 0..p {
                    acc += theta[k] * delta_rows[v * p + k];
                }
                logits.push(acc);
            }
            let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            let mut probs = vec![0.0; max + 1];
            for v in 0..=max {
                probs[v] = (logits[v] - m).exp();
                z += probs[v];
            }
            probs.iter_mut().for_each(|pr| *pr /= z);
            let mut expect = vec![0.0; p];
            for v in 0..=max {
                for k in 0..p {
                    expect[k] += probs[v] * delta_rows[v * p + k];
                }
            }
            for k in 0..p {
                grad[k] += delta_rows[y as usize * p + k] - expect[k];
                for l in 0..p {
                    let mut cov = 0.0;
                    for v in 0..=max {
                        cov += probs[v] * delta_rows[v * p + k] * delta_rows[v * p + l];
                    }
                    hess[(k, l)] += cov - expect[k] * expect[l];
                }
            }
        }
        if grad.amax() < MPLE_TOL {
            converged = true;
            break;
        }
        let mut step = match hess.clone().cholesky() {
            Some(ch) => ch.solve(&grad),
            None => {
                ridge_used = true;
                let scale = hess.trace().abs().max(1.0) / p as f64;
                for d in 0..p {
                    hess[(d, d)] += 1e-6 * scale;
                }
                match hess.clone().cholesky() {
                    Some(ch) => ch.solve(&grad),
                    None => break,
                }
            }
        };
        let norm = step.norm();
        if norm > NEWTON_STEP_CAP {
            step *= NEWTON_STEP_CAP / norm;
        }
        theta += step;
    }

    ValuedPseudoOutcome { theta: theta.data.into(), converged, iterations, ridge_used }
}

/// Maximum pseudolikelihood for a valued model: per-dyad conditional
/// categorical likelihood under the binomial reference. Exact MLE for
/// dyad-independent models and the initializer for the Monte-Carlo MLE.
pub fn fit_mple_valued(spec: &ModelSpec, net: &ValuedNetwork, data: &ModelData) -> Result<FitResult> {
    if !spec.mode.is_valued() {
        return Err(Error::Estimation("fit_mple_valued expects a valued-mode model".into()));
    }
    let model = compile(spec, net.n(), data)?;
    if net.max_weight() > model.max_value() {
        return Err(Error::Estimation(format!(
            "network max weight {} exceeds model maximum {}",
            net.max_weight(),
            model.max_value()
        )));
    }
    let rows = valued_pseudo_rows(&model, net)?;
    let outcome = valued_pseudo_newton(&rows, model.dim());
    Ok(FitResult {
        labels: model.labels(),
        estimates: outcome.theta,
        inference: Inference::None,
        converged: outcome.converged,
        iterations: outcome.iterations,
        diagnostics: FitDiagnostics { ridge_used: outcome.ridge_used, ..Default::default() },
    })
}

// ---------------------------------------------------------------------------
// Valued MC-MLE (Geyer-Thompson importance sampling)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct VergmOptions {
    /// Retained draws per iteration (grows ×2 on degeneracy, capped at `max_doublings`).
    pub sample_count: usize,
    /// Burn-in steps; default 40 sweeps of the dyad set.
    pub burn_in: Option<usize>,
    /// Steps between retained draws; default one sweep.
    pub interval: Option<usize>,
    pub seed: u64,
    pub max_iterations: usize,
    /// Trust-region cap on ‖θ_new − θ_cur‖ per outer iteration.
    pub step_max: f64,
    /// Convergence threshold on per-statistic |sampled mean − observed| / sd.
    pub t_ratio_tol: f64,
    pub max_doublings: usize,
}

impl VergmOptions {
    pub fn new(sample_count: usize, seed: u64) -> Self {
        Self {
            sample_count,
            burn_in: None,
            interval: None,
            seed,
            max_iterations: 60,
            step_max: 0.5,
            t_ratio_tol: 0.1,
            max_doublings: 4,
        }
    }
}

/// Monte-Carlo maximum likelihood for a valued model.
///
/// Starts from the valued pseudolikelihood, then iterates Geyer-Thompson
/// importance-sampling updates: draw a batch at θ, maximize the sampled
/// likelihood-ratio approximation under a trust-region cap, and stop when
/// every statistic's convergence t-ratio is below tolerance. Standard errors
/// come from the inverse sampled Fisher information at the final iterate.
pub fn fit_vergm_mcmle(
    spec: &ModelSpec,
    net: &ValuedNetwork,
    data: &ModelData,
    options: &VergmOptions,
) -> Result<FitResult> {
    if !spec.mode.is_valued() {
        return Err(Error::Estimation("fit_vergm_mcmle expects a valued-mode model".into()));
    }
    let model = compile(spec, net.n(), data)?;
    let p = model.dim();
    if net.max_weight() > model.max_value() {
        return Err(Error::Estimation(format!(
            "network max weight {} exceeds model maximum {}",
            net.max_weight(),
            model.max_value()
        )));
    }
    let g_obs = eval_valued(&model, net)?;

    // Initialize at the pseudolikelihood estimate.
    let init = {
        let rows = valued_pseudo_rows(&model, net)?;
        valued_pseudo_newton(&rows, p)
    };
    let mut theta = DVector::from_vec(init.theta);
    let mut notes = Vec::new();
    if !init.converged {
        notes.push("pseudolikelihood initializer did not fully converge".into());
    }

    let n_dyads = net.n() * (net.n() - 1) / 2;
    let mut sample_count = options.sample_count.max(16);
    let burn_in = options.burn_in.unwrap_or(40 * n_dyads);
    let interval = options.interval.unwrap_or(n_dyads.max(1));

    let mut converged = false;
    let mut iterations = 0;
    let mut doublings = 0;
    let mut hull_failures = 0;
    let mut last_batch: Option<SampleBatch> = None;
    let mut t_ratios = vec![f64::NAN; p];

    for iter in 1..=options.max_iterations {
        iterations = iter;
        let mut config = SamplerConfig::new(options.seed);
        config.stream = iter as u64;
        config.burn_in = burn_in;
        config.interval = interval;
        config.sample_count = sample_count;
        let batch = sample_valued(&model, theta.as_slice(), Some(net), &config)?;

        let means = batch.means();
        let sds: Vec<f64> = (0..p)
            .map(|k| {
                let col = batch.column(k);
                let var = col.iter().map(|v| (v - means[k]).powi(2)).sum::<f64>()
                    / (col.len() - 1).max(1) as f64;
                var.sqrt()
            })
            .collect();
        for k in 0..p {
            t_ratios[k] = if sds[k] > 0.0 { (means[k] - g_obs[k]) / sds[k] } else { f64::INFINITY };
        }

        if t_ratios.iter().all(|t| t.abs() < options.t_ratio_tol) {
            converged = true;
            last_batch = Some(batch);
            break;
        }

        // Hull check: the observed vector must be inside the sampled range in
        // every coordinate, otherwise the importance approximation carries no
        // information about the MLE direction at this sample size.
        let outside = (0..p).any(|k| {
            let col = batch.column(k);
            let min = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            g_obs[k] < min || g_obs[k] > max
        });
        if outside {
            hull_failures += 1;
            if doublings < options.max_doublings {
                doublings += 1;
                sample_count *= 2;
                notes.push(format!(
                    "iteration {iter}: observed statistics outside sampled hull, sample count doubled to {sample_count}"
                ));
                last_batch = Some(batch);
                continue;
            }
            if hull_failures > options.max_doublings + 2 {
                return Err(Error::Degenerate(format!(
                    "observed statistics remain outside the sampled hull after {doublings} sample-size doublings; convergence t-ratios: {t_ratios:?}"
                )));
            }
        }

        // Geyer-Thompson inner maximization with a trust-region cap.
        let step = geyer_thompson_step(&batch, &g_obs, options.step_max, p);
        theta += step;
        last_batch = Some(batch);
    }

    let batch = last_batch.expect("at least one iteration ran");
    let (std_errors, se_note) = fisher_standard_errors(&batch, p);
    if let Some(note) = se_note {
        notes.push(note);
    }

    let diagnostics = FitDiagnostics {
        t_ratios: Some(t_ratios),
        acceptance_rate: Some(batch.acceptance_rate),
        sample_count: Some(batch.sample_count()),
        ridge_used: init.ridge_used,
        separation_suspected: false,
        notes,
    };
    let estimates: Vec<f64> = theta.data.into();
    Ok(FitResult {
        labels: model.labels(),
        inference: wald_inference(&estimates, std_errors),
        estimates,
        converged,
        iterations,
        diagnostics,
    })
}

/// One capped Newton update of the importance-sampled log-likelihood ratio
/// l(θ+d) − l(θ) = dᵀ g_obs − log (1/S) Σ_s exp(dᵀ g_s).
fn geyer_thompson_step(batch: &SampleBatch, g_obs: &[f64], step_max: f64, p: usize) -> DVector<f64> {
    let mut d = DVector::<f64>::zeros(p);
    for _ in 0..25 {
        // softmax weights ω_s ∝ exp(dᵀ g_s)
        let logits: Vec<f64> = batch
            .statistics
            .iter()
            .map(|row| row.iter().zip(d.iter()).map(|(g, di)| g * di).sum::<f64>())
            .collect();
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        let weights: Vec<f64> = logits
            .iter()
            .map(|l| {
                let w = (l - m).exp();
                z += w;
                w
            })
            .collect();

        let mut mean = vec![0.0; p];
        for (row, w) in batch.statistics.iter().zip(&weights) {
            for k in 0..p {
                mean[k] += w * row[k];
            }
        }
        mean.iter_mut().for_each(|v| *v /= z);

        let mut grad = DVector::<f64>::zeros(p);
        for k in 0..p {
            grad[k] = g_obs[k] - mean[k];
        }
        let mut cov = DMatrix::<f64>::zeros(p, p);
        for (row, w) in batch.statistics.iter().zip(&weights) {
            for k in 0..p {
                for l in 0..p {
                    cov[(k, l)] += w * (row[k] - mean[k]) * (row[l] - mean[l]);
                }
            }
        }
        cov /= z;
        let scale = cov.trace().abs().max(1e-12) / p as f64;
        for k in 0..p {
            cov[(k, k)] += 1e-9 * scale;
        }
        let Some(ch) = cov.cholesky() else { break };
        let step = ch.solve(&grad);
        let mut new_d = &d + step;
        if new_d.norm() > step_max {
            new_d *= step_max / new_d.norm();
        }
        let moved = (&new_d - &d).norm();
        d = new_d;
        if moved < 1e-10 || d.norm() >= step_max {
            break;
        }
    }
    d
}

/// SEs from the inverse sample covariance of the statistics (the estimated
/// Fisher information of an exponential family).
fn fisher_standard_errors(batch: &SampleBatch, p: usize) -> (Vec<f64>, Option<String>) {
    let s = batch.sample_count();
    if s < 2 {
        return (vec![f64::NAN; p], Some("too few draws for standard errors".into()));
    }
    let means = batch.means();
    let mut cov = DMatrix::<f64>::zeros(p, p);
    for row in &batch.statistics {
        for k in 0..p {
            for l in 0..p {
                cov[(k, l)] += (row[k] - means[k]) * (row[l] - means[l]);
            }
        }
    }
    cov /= (s - 1) as f64;
    match cov.clone().try_inverse() {
        Some(inv) => ((0..p).map(|k| inv[(k, k)].max(0.0).sqrt()).collect(), None),
        None => (
            vec![f64::NAN; p],
            Some("sampled Fisher information is singular; standard errors unavailable".into()),
        ),
    }
}

// ---------------------------------------------------------------------------
// Multicollinearity diagnostics
// ---------------------------------------------------------------------------

/// Variance inflation factors: the diagonal of the inverse correlation matrix
/// of the sampled statistics. Statistics with (numerically) zero variance or
/// exact linear dependence report infinite VIF.
pub fn vif_diagnostics(batch: &SampleBatch) -> Result<Vec<f64>> {
    let p = batch.dim();
    let s = batch.sample_count();
    if s <= p {
        return Err(Error::Estimation(format!("VIF needs more draws ({s}) than statistics ({p})")));
    }
    let means = batch.means();
    let mut sds = vec![0.0; p];
    for k in 0..p {
        let var = batch
            .statistics
            .iter()
            .map(|row| (row[k] - means[k]).powi(2))
            .sum::<f64>()
            / (s - 1) as f64;
        sds[k] = var.sqrt();
    }
    let zero_var: Vec<bool> = sds.iter().map(|sd| *sd <= 0.0).collect();
    let mut corr = DMatrix::<f64>::identity(p, p);
    for k in 0..p {
        for l in (k + 1)..p {
            if zero_var[k] || zero_var[l] {
                continue;
            }
            let c = batch
                .statistics
                .iter()
                .map(|row| (row[k] - means[k]) * (row[l] - means[l]))
                .sum::<f64>()
                / (s - 1) as f64
                / (sds[k] * sds[l]);
            corr[(k, l)] = c;
            corr[(l, k)] = c;
        }
    }

    let invertible = corr.clone().try_inverse();
    match invertible {
        Some(inv) if (0..p).all(|k| inv[(k, k)].is_finite() && inv[(k, k)] > 0.0) => Ok((0..p)
            .map(|k| if zero_var[k] { f64::INFINITY } else { inv[(k, k)] })
            .collect()),
        _ => {
            // singular correlation: fall back to per-statistic R² against the rest
            let mut out = Vec::with_capacity(p);
            for k in 0..p {
                if zero_var[k] {
                    out.push(f64::INFINITY);
                    continue;
                }
                let r2 = regression_r_squared(batch, &means, &sds, k);
                out.push(if r2 >= 1.0 - 1e-12 { f64::INFINITY } else { 1.0 / (1.0 - r2) });
            }
            Ok(out)
        }
    }
}

fn regression_r_squared(batch: &SampleBatch, means: &[f64], sds: &[f64], k: usize) -> f64 {
    let p = batch.dim();
    let s = batch.sample_count();
    let others: Vec<usize> = (0..p).filter(|&l| l != k && sds[l] > 0.0).collect();
    if others.is_empty() {
        return 0.0;
    }
    let mut design = DMatrix::<f64>::zeros(s, others.len());
    let mut target = DVector::<f64>::zeros(s);
    for (row_idx, row) in batch.statistics.iter().enumerate() {
        for (col_idx, &l) in others.iter().enumerate() {
            design[(row_idx, col_idx)] = (row[l] - means[l]) / sds[l];
        }
        target[row_idx] = (row[k] - means[k]) / sds[k];
    }
    let svd = design.clone().svd(true, true);
    let coef = svd.solve(&target, 1e-10).expect("svd solve");
    let fitted = design * coef;
    let ss_res: f64 = (&target - &fitted).iter().map(|v| v * v).sum();
    let ss_tot: f64 = target.iter().map(|v| v * v).sum();
    if ss_tot <= 0.0 {
        0.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    }
}

// ---------------------------------------------------------------------------
// Exact MLE oracle for tiny binary models
// ---------------------------------------------------------------------------

/// Newton on the exact log-likelihood via full enumeration (binary, n ≤ 6).
/// Boundary estimates (empty or saturated statistics) are flagged as
/// non-converged with diverging coefficients.
pub fn exact_mle_small(spec: &ModelSpec, net: &BinaryNetwork, data: &ModelData) -> Result<FitResult> {
    if spec.mode.is_valued() {
        return Err(Error::Estimation("exact_mle_small handles binary models".into()));
    }
    let model = compile(spec, net.n(), data)?;
    let p = model.dim();
    let g_obs = crate::terms::eval_binary(&model, net)?;
    let mut theta = DVector::<f64>::zeros(p);
    let mut converged = false;
    let mut iterations = 0;
    let mut diverged = false;

    for iter in 1..=200 {
        iterations = iter;
        let moments = enumerate_exact(&model, theta.as_slice())?;
        let mut grad = DVector::<f64>::zeros(p);
        for k in 0..p {
            grad[k] = g_obs[k] - moments.mean[k];
        }
        if grad.amax() < 1e-10 {
            converged = true;
            break;
        }
        let mut hess = DMatrix::<f64>::zeros(p, p);
        for k in 0..p {
            for l in 0..p {
                hess[(k, l)] = moments.covariance[k * p + l];
            }
        }
        let scale = hess.trace().abs().max(1e-12) / p as f64;
        for k in 0..p {
            hess[(k, k)] += 1e-12 * scale;
        }
        let Some(ch) = hess.cholesky() else {
            break;
        };
        let mut step = ch.solve(&grad);
        let norm = step.norm();
        if norm > 2.0 {
            step *= 2.0 / norm;
        }
        theta += step;
        if theta.amax() > 15.0 {
            diverged = true;
            break;
        }
    }

    let mut diagnostics = FitDiagnostics::default();
    if diverged {
        diagnostics.notes.push("boundary maximum likelihood: estimates diverge".into());
        diagnostics.separation_suspected = true;
    }
    Ok(FitResult {
        labels: model.labels(),
        estimates: theta.data.into(),
        inference: Inference::None,
        converged,
        iterations,
        diagnostics,
    })
}
