//! Gaussian-mixture viewpoint attack.
//!
//! The adversarial viewpoint distribution is a K-component diagonal Gaussian
//! mixture over an unconstrained vector `u`, pushed through
//! `v = a * tanh(u) + b` into the viewpoint box. Its parameters are trained
//! by gradient ascent on
//!
//! ```text
//! E[ L(f(R(v)), y) - lambda * log p(v) ]
//! ```
//!
//! using natural-evolution-strategy estimates for the loss term (the model
//! is only queried, never differentiated) and the closed-form gradient of
//! the entropy term. Samples are drawn with an explicit component indicator
//! and the reparameterization `u = mu_k + sigma_k * r`, `r ~ N(0, I)`.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Viewpoint, ViewpointBounds, DIMS};
use crate::optim::{Adam, OptimizerKind};
use crate::oracle::ViewpointOracle;

/// Lower bound on mixture weights; the gradient estimator divides by them.
pub const OMEGA_FLOOR: f64 = 1e-3;
pub const SIGMA_MIN: f64 = 1e-3;
pub const SIGMA_MAX: f64 = 2.0;
pub const SIGMA_INIT: f64 = 0.5;
/// Initial component means are spread over `[-INIT_SPREAD, INIT_SPREAD]^6`.
pub const INIT_SPREAD: f64 = 1.0;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

pub type Vec6 = [f64; DIMS];

/// Mixture parameters: weights, means and standard deviations in u-space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    pub omega: Vec<f64>,
    pub mu: Vec<Vec6>,
    pub sigma: Vec<Vec6>,
}

impl MixtureParams {
    pub fn k(&self) -> usize {
        self.omega.len()
    }

    /// A single component with the given mean and a shared scale.
    pub fn single(mu: Vec6, sigma: f64) -> Self {
        MixtureParams {
            omega: vec![1.0],
            mu: vec![mu],
            sigma: vec![[sigma; DIMS]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if k == 0 || self.mu.len() != k || self.sigma.len() != k {
            return Err(Error::ShapeMismatch {
                expected: k.max(1),
                got: self.mu.len().min(self.sigma.len()),
            });
        }
        let flat = self
            .omega
            .iter()
            .chain(self.mu.iter().flatten())
            .chain(self.sigma.iter().flatten());
        if flat.into_iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteInput("mixture parameters"));
        }
        let sum: f64 = self.omega.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("mixture weights sum to {sum}")));
        }
        for (index, &w) in self.omega.iter().enumerate() {
            if w < OMEGA_FLOOR * (1.0 - 1e-9) {
                return Err(Error::DegenerateWeight {
                    index,
                    weight: w,
                    floor: OMEGA_FLOOR,
                });
            }
        }
        if self.sigma.iter().flatten().any(|s| !(SIGMA_MIN..=SIGMA_MAX).contains(s)) {
            return Err(Error::InvalidConfig("sigma outside clamp range".into()));
        }
        Ok(())
    }

    /// The component means mapped into viewpoint space.
    pub fn component_modes(&self, bounds: &ViewpointBounds) -> Vec<Viewpoint> {
        self.mu.iter().map(|m| bounds.tanh_transform_unchecked(m)).collect()
    }

    /// Rescales every sigma, clamped to the allowed range.
    pub fn scaled_sigma(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for s in out.sigma.iter_mut().flatten() {
            *s = (*s * factor).clamp(SIGMA_MIN, SIGMA_MAX);
        }
        out
    }

    fn flatten(&self) -> Vec<f64> {
        self.omega
            .iter()
            .chain(self.mu.iter().flatten())
            .chain(self.sigma.iter().flatten())
            .copied()
            .collect()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Uniform weights, `sigma = SIGMA_INIT`, and means on a Korobov-style
/// lattice: along every axis the K means occupy the K equal strata of
/// `[-INIT_SPREAD, INIT_SPREAD]` exactly once. The first axis is ordered by
/// component index; the seed picks the lattice generators of the others.
pub fn init_mixture(k: usize, seed: u64) -> Result<MixtureParams> {
    if k == 0 {
        return Err(Error::InvalidConfig("K must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let units: Vec<usize> = (1..k.max(2)).filter(|g| gcd(*g, k) == 1).collect();
    let mut gens = [1usize; DIMS];
    for g in gens.iter_mut().skip(1) {
        *g = if units.is_empty() { 1 } else { units[rng.random_range(0..units.len())] };
    }
    let mu = (0..k)
        .map(|i| {
            let mut m = [0.0; DIMS];
            for d in 0..DIMS {
                let stratum = (i * gens[d]) % k;
                let x = (stratum as f64 + 0.5) / k as f64;
                m[d] = INIT_SPREAD * (2.0 * x - 1.0);
            }
            m
        })
        .collect();
    Ok(MixtureParams {
        omega: vec![1.0 / k as f64; k],
        mu,
        sigma: vec![[SIGMA_INIT; DIMS]; k],
    })
}

/// Draws a component index with probability `omega[k]`.
pub fn sample_gamma<R: Rng + ?Sized>(omega: &[f64], rng: &mut R) -> usize {
    let total: f64 = omega.iter().sum();
    let x = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (k, w) in omega.iter().enumerate() {
        acc += w;
        if x < acc {
            return k;
        }
    }
    omega.len() - 1
}

/// One-hot encoding of a component index.
pub fn one_hot(component: usize, k: usize) -> Vec<f64> {
    (0..k).map(|i| if i == component { 1.0 } else { 0.0 }).collect()
}

pub fn standard_normal6<R: Rng + ?Sized>(rng: &mut R) -> Vec6 {
    let mut r = [0.0; DIMS];
    for x in &mut r {
        *x = StandardNormal.sample(rng);
    }
    r
}

/// `u = mu_k + sigma_k * r` and its image in viewpoint space.
pub fn reparam_sample(
    params: &MixtureParams,
    component: usize,
    r: &Vec6,
    bounds: &ViewpointBounds,
) -> (Vec6, Viewpoint) {
    let mut u = [0.0; DIMS];
    for d in 0..DIMS {
        u[d] = params.mu[component][d] + params.sigma[component][d] * r[d];
    }
    (u, bounds.tanh_transform_unchecked(&u))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSample {
    pub component: usize,
    pub r: Vec6,
    pub u: Vec6,
    pub v: Viewpoint,
    pub loss: f64,
}

/// `log(1 - tanh(x)^2)` without cancellation for large |x|.
fn log_sech2(x: f64) -> f64 {
    let ax = x.abs();
    2.0 * (std::f64::consts::LN_2 - ax - (-2.0 * ax).exp().ln_1p())
}

fn log_gaussian(u: &Vec6, mu: &Vec6, sigma: &Vec6) -> f64 {
    (0..DIMS)
        .map(|d| {
            let z = (u[d] - mu[d]) / sigma[d];
            -0.5 * LN_2PI - sigma[d].ln() - 0.5 * z * z
        })
        .sum()
}

/// Log density of the u-space mixture, via log-sum-exp.
pub fn log_density_u(params: &MixtureParams, u: &Vec6) -> f64 {
    let terms: Vec<f64> = (0..params.k())
        .map(|k| params.omega[k].ln() + log_gaussian(u, &params.mu[k], &params.sigma[k]))
        .collect();
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// `sum_d log(a_d * (1 - tanh(u_d)^2))`, the log-Jacobian of `u -> v`.
pub fn log_jacobian(u: &Vec6, bounds: &ViewpointBounds) -> f64 {
    (0..DIMS).map(|d| bounds.a()[d].ln() + log_sech2(u[d])).sum()
}

/// Log density of the viewpoint `v = a * tanh(u) + b`, expressed in `u`.
pub fn log_density_v(params: &MixtureParams, u: &Vec6, bounds: &ViewpointBounds) -> f64 {
    log_density_u(params, u) - log_jacobian(u, bounds)
}

/// Gradient (or gradient-shaped update) with respect to every parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureGradients {
    pub omega: Vec<f64>,
    pub mu: Vec<Vec6>,
    pub sigma: Vec<Vec6>,
}

impl MixtureGradients {
    pub fn zeros(k: usize) -> Self {
        MixtureGradients {
            omega: vec![0.0; k],
            mu: vec![[0.0; DIMS]; k],
            sigma: vec![[0.0; DIMS]; k],
        }
    }

    fn flatten(&self) -> Vec<f64> {
        self.omega
            .iter()
            .chain(self.mu.iter().flatten())
            .chain(self.sigma.iter().flatten())
            .copied()
            .collect()
    }

    pub fn add(&self, other: &MixtureGradients) -> MixtureGradients {
        let mut out = self.clone();
        for (a, b) in out.omega.iter_mut().zip(&other.omega) {
            *a += b;
        }
        for (a, b) in out.mu.iter_mut().flatten().zip(other.mu.iter().flatten()) {
            *a += b;
        }
        for (a, b) in out.sigma.iter_mut().flatten().zip(other.sigma.iter().flatten()) {
            *a += b;
        }
        out
    }
}

/// The two additive parts of the gradient estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientTerms {
    /// Terms proportional to the classification loss.
    pub loss: MixtureGradients,
    /// Terms proportional to `lambda` (entropy regularizer).
    pub entropy: MixtureGradients,
}

impl GradientTerms {
    pub fn total(&self) -> MixtureGradients {
        self.loss.add(&self.entropy)
    }
}

/// Monte Carlo gradient estimate, split into loss and entropy parts.
///
/// For a sample from component `k` with noise `r` and loss `L`:
///
/// ```text
/// d omega_k += L / omega_k - lambda
/// d mu_k    += L * sigma_k * r / omega_k - 2 * lambda * tanh(mu_k + sigma_k * r)
/// d sigma_k += L * sigma_k * (r^2 - 1) / (2 * omega_k)
///              + lambda * (1 - 2 * r * tanh(mu_k + sigma_k * r) * sigma_k) / sigma_k
/// ```
///
/// and every sum is divided by the total sample count. Other components
/// receive nothing from the sample.
pub fn nes_gradient_terms(
    params: &MixtureParams,
    samples: &[ComponentSample],
    lambda: f64,
) -> Result<GradientTerms> {
    if samples.is_empty() {
        return Err(Error::InvalidConfig("need at least one sample".into()));
    }
    for (index, &w) in params.omega.iter().enumerate() {
        if w < OMEGA_FLOOR * (1.0 - 1e-9) {
            return Err(Error::DegenerateWeight {
                index,
                weight: w,
                floor: OMEGA_FLOOR,
            });
        }
    }
    let k_total = params.k();
    let mut loss = MixtureGradients::zeros(k_total);
    let mut entropy = MixtureGradients::zeros(k_total);
    let n = samples.len() as f64;
    for s in samples {
        let k = s.component;
        let w = params.omega[k];
        let mu = &params.mu[k];
        let sigma = &params.sigma[k];
        loss.omega[k] += s.loss / w / n;
        entropy.omega[k] -= lambda / n;
        for d in 0..DIMS {
            let r = s.r[d];
            let t = (mu[d] + sigma[d] * r).tanh();
            loss.mu[k][d] += s.loss * sigma[d] * r / w / n;
            entropy.mu[k][d] -= lambda * 2.0 * t / n;
            loss.sigma[k][d] += s.loss * sigma[d] * (r * r - 1.0) / (2.0 * w) / n;
            entropy.sigma[k][d] += lambda * (1.0 - 2.0 * r * t * sigma[d]) / sigma[d] / n;
        }
    }
    Ok(GradientTerms { loss, entropy })
}

pub fn nes_gradients(
    params: &MixtureParams,
    samples: &[ComponentSample],
    lambda: f64,
) -> Result<MixtureGradients> {
    Ok(nes_gradient_terms(params, samples, lambda)?.total())
}

/// Floors every weight at `OMEGA_FLOOR` and renormalizes to sum one,
/// keeping the floor satisfied after normalization.
pub fn project_weights(omega: &mut [f64]) {
    let k = omega.len();
    for w in omega.iter_mut() {
        if !w.is_finite() || *w < 0.0 {
            *w = 0.0;
        }
    }
    let sum: f64 = omega.iter().sum();
    if sum <= 0.0 {
        omega.iter_mut().for_each(|w| *w = 1.0 / k as f64);
        return;
    }
    omega.iter_mut().for_each(|w| *w /= sum);
    let mut pinned = vec![false; k];
    loop {
        let mut changed = false;
        for i in 0..k {
            if !pinned[i] && omega[i] < OMEGA_FLOOR {
                pinned[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let free_mass = 1.0 - OMEGA_FLOOR * pinned.iter().filter(|&&p| p).count() as f64;
        let free_sum: f64 = (0..k).filter(|&i| !pinned[i]).map(|i| omega[i]).sum();
        for i in 0..k {
            omega[i] = if pinned[i] {
                OMEGA_FLOOR
            } else {
                omega[i] * free_mass / free_sum
            };
        }
    }
}

/// Optimizer state for the mixture parameters of one attack.
#[derive(Clone, Debug)]
pub struct MixtureOptimizer {
    kind: OptimizerKind,
    adam: Option<Adam>,
}

impl MixtureOptimizer {
    pub fn new(kind: OptimizerKind) -> Self {
        MixtureOptimizer { kind, adam: None }
    }
}

/// Gradient-ascent step, then sigma clamping and weight projection.
pub fn update_params(
    params: &MixtureParams,
    grads: &MixtureGradients,
    eta: f64,
    opt: &mut MixtureOptimizer,
) -> MixtureParams {
    let g = grads.flatten();
    let step = match opt.kind {
        OptimizerKind::Sgd => g,
        OptimizerKind::Adam => opt
            .adam
            .get_or_insert_with(|| Adam::new(g.len()))
            .direction(&g),
    };
    let k = params.k();
    let mut next = params.clone();
    let mut it = step.into_iter();
    for w in next.omega.iter_mut() {
        *w += eta * it.next().expect("layout");
    }
    for m in next.mu.iter_mut().flatten() {
        *m += eta * it.next().expect("layout");
    }
    for s in next.sigma.iter_mut().flatten() {
        *s = (*s + eta * it.next().expect("layout")).clamp(SIGMA_MIN, SIGMA_MAX);
    }
    debug_assert_eq!(next.flatten().len(), k * (1 + 2 * DIMS));
    project_weights(&mut next.omega);
    next
}

fn default_eta() -> f64 {
    0.005
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub k: usize,
    pub iterations: usize,
    pub samples: usize,
    #[serde(default = "default_eta")]
    pub eta: f64,
    pub lambda: f64,
    #[serde(default)]
    pub optimizer: OptimizerKind,
    pub seed: u64,
    /// Fresh samples used for the final entropy estimate.
    #[serde(default = "default_entropy_samples")]
    pub entropy_samples: usize,
}

fn default_entropy_samples() -> usize {
    10_000
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            k: 15,
            iterations: 50,
            samples: 100,
            eta: default_eta(),
            lambda: 0.01,
            optimizer: OptimizerKind::Adam,
            seed: 0,
            entropy_samples: default_entropy_samples(),
        }
    }
}

impl AttackConfig {
    /// Plain ascent with its default step size.
    pub fn sgd() -> Self {
        AttackConfig {
            optimizer: OptimizerKind::Sgd,
            eta: 0.01,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || self.iterations < 1 || self.samples < 1 {
            return Err(Error::InvalidConfig("K, T and q must all be >= 1".into()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig("lambda must be >= 0".into()));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidConfig("eta must be >= 0".into()));
        }
        if self.k as f64 * OMEGA_FLOOR > 1.0 {
            return Err(Error::InvalidConfig("K too large for the weight floor".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Sample mean of `L - lambda * log p(v)`.
    pub objective: f64,
    /// Sample mean of `-log p(v)` over this iteration's draws.
    pub entropy: f64,
    pub mean_loss: f64,
    /// Largest loss seen so far in the attack.
    pub best_loss: f64,
    /// Cumulative oracle queries.
    pub queries: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    pub params: MixtureParams,
    pub trace: Vec<IterationRecord>,
    pub queries: u64,
    pub entropy: EntropyEstimate,
    pub best_loss: f64,
    pub best_viewpoint: Viewpoint,
    /// Misclassification rate under the learned distribution, filled in by
    /// callers that hold the classifier.
    pub success_rate: Option<f64>,
}

/// Runs the attack loop for `config.iterations` iterations from `initial`.
///
/// Each iteration draws `config.samples` component indices and noise
/// vectors, queries the oracle once per sample, and takes one ascent step.
/// Oracle calls within an iteration may run in parallel; all reductions
/// follow sample order.
pub fn gmvfool_attack<O: ViewpointOracle + ?Sized>(
    oracle: &O,
    initial: &MixtureParams,
    bounds: &ViewpointBounds,
    config: &AttackConfig,
) -> Result<AttackResult> {
    gmvfool_attack_observed(oracle, initial, bounds, config, |_, _, _| {})
}

/// As [`gmvfool_attack`], calling `observe(iteration, params, samples)`
/// after the oracle has scored each iteration's samples; `params` are the
/// parameters the samples were drawn from.
pub fn gmvfool_attack_observed<O, F>(
    oracle: &O,
    initial: &MixtureParams,
    bounds: &ViewpointBounds,
    config: &AttackConfig,
    mut observe: F,
) -> Result<AttackResult>
where
    O: ViewpointOracle + ?Sized,
    F: FnMut(usize, &MixtureParams, &[ComponentSample]),
{
    config.validate()?;
    initial.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = initial.clone();
    let mut opt = MixtureOptimizer::new(config.optimizer);
    let mut trace = Vec::with_capacity(config.iterations);
    let mut best_loss = f64::NEG_INFINITY;
    let mut best_viewpoint = bounds.midpoint();
    let mut queries = 0u64;

    for iteration in 0..config.iterations {
        let draws: Vec<(usize, Vec6)> = (0..config.samples)
            .map(|_| {
                let r = standard_normal6(&mut rng);
                (sample_gamma(&params.omega, &mut rng), r)
            })
            .collect();
        let mut samples: Vec<ComponentSample> = draws
            .into_iter()
            .map(|(component, r)| {
                let (u, v) = reparam_sample(&params, component, &r, bounds);
                ComponentSample {
                    component,
                    r,
                    u,
                    v,
                    loss: 0.0,
                }
            })
            .collect();
        let losses: Vec<f64> = samples.par_iter().map(|s| oracle.loss(&s.v)).collect();
        queries += samples.len() as u64;
        let mut objective = 0.0;
        let mut entropy = 0.0;
        let mut mean_loss = 0.0;
        let n = samples.len() as f64;
        for (s, l) in samples.iter_mut().zip(losses) {
            s.loss = l;
            let neg_log_p = -log_density_v(&params, &s.u, bounds);
            objective += (l + config.lambda * neg_log_p) / n;
            entropy += neg_log_p / n;
            mean_loss += l / n;
            if l > best_loss {
                best_loss = l;
                best_viewpoint = s.v;
            }
        }
        observe(iteration, &params, &samples);
        let grads = nes_gradients(&params, &samples, config.lambda)?;
        params = update_params(&params, &grads, config.eta, &mut opt);
        trace.push(IterationRecord {
            iteration,
            objective,
            entropy,
            mean_loss,
            best_loss,
            queries,
        });
    }

    let entropy = entropy_estimate(&params, bounds, config.entropy_samples.max(1), &mut rng);
    Ok(AttackResult {
        params,
        trace,
        queries,
        entropy,
        best_loss,
        best_viewpoint,
        success_rate: None,
    })
}

/// Draws one viewpoint from the mixture.
pub fn sample_viewpoint<R: Rng + ?Sized>(
    params: &MixtureParams,
    bounds: &ViewpointBounds,
    rng: &mut R,
) -> (Vec6, Viewpoint) {
    let r = standard_normal6(rng);
    let k = sample_gamma(&params.omega, rng);
    reparam_sample(params, k, &r, bounds)
}

/// Monte Carlo estimate of the differential entropy of `p(v)`.
pub fn entropy_estimate<R: Rng + ?Sized>(
    params: &MixtureParams,
    bounds: &ViewpointBounds,
    n: usize,
    rng: &mut R,
) -> EntropyEstimate {
    let n = n.max(1);
    let vals: Vec<f64> = (0..n)
        .map(|_| {
            let (u, _) = sample_viewpoint(params, bounds, rng);
            -log_density_v(params, &u, bounds)
        })
        .collect();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    EntropyEstimate {
        value: mean,
        std_error: (var / n as f64).sqrt(),
    }
}

/// Serialized form of a learned distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionCheckpoint {
    #[serde(rename = "K")]
    pub k: usize,
    pub omega: Vec<f64>,
    pub mu: Vec<Vec6>,
    pub sigma: Vec<Vec6>,
    pub bounds: ViewpointBounds,
    pub seed: u64,
    pub iteration: usize,
}

impl DistributionCheckpoint {
    pub fn new(params: &MixtureParams, bounds: &ViewpointBounds, seed: u64, iteration: usize) -> Self {
        DistributionCheckpoint {
            k: params.k(),
            omega: params.omega.clone(),
            mu: params.mu.clone(),
            sigma: params.sigma.clone(),
            bounds: bounds.clone(),
            seed,
            iteration,
        }
    }

    pub fn params(&self) -> Result<MixtureParams> {
        let p = MixtureParams {
            omega: self.omega.clone(),
            mu: self.mu.clone(),
            sigma: self.sigma.clone(),
        };
        if p.k() != self.k {
            return Err(Error::ShapeMismatch {
                expected: self.k,
                got: p.k(),
            });
        }
        p.validate()?;
        Ok(p)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[derive(Serialize, Deserialize)]
struct TraceRow {
    iteration: usize,
    objective: f64,
    entropy: f64,
    best_sample_loss: f64,
    queries: u64,
}

/// Writes `iteration,objective,entropy,best_sample_loss,queries` rows.
pub fn write_trace_csv<W: std::io::Write>(trace: &[IterationRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in trace {
        w.serialize(TraceRow {
            iteration: r.iteration,
            objective: r.objective,
            entropy: r.entropy,
            best_sample_loss: r.best_loss,
            queries: r.queries,
        })?;
    }
    w.flush()?;
    Ok(())
}
