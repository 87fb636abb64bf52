//! Monte-Carlo marginal likelihood with reparameterised parameter samples.
//!
//! Each sample draws `r ~ N(0, I)` and realises `theta = sigma * r + mu`. The
//! marginal is the sample mean of the model's likelihood, and because
//! `d theta / d mu = 1` and `d theta / d sigma = r`, its gradients are sample
//! means of the backpropagated `df/dtheta` (times `r` for sigma).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{FiresError, Result};
use crate::exec::{self, Execution};
use crate::harness::data::{Label, StreamBatch};
use crate::prob::GaussianParamSet;

use super::LIKELIHOOD_FLOOR;

/// Rows per work unit when a batch is split across threads.
const ROW_CHUNK: usize = 4;

/// Below this many row-parameter products a batch is processed inline.
const PARALLEL_THRESHOLD: usize = 1 << 16;

/// SplitMix64 finaliser; derives independent seeds from a master seed.
pub fn derive_seed(master: u64, stream: u64, counter: u64) -> u64 {
    let mut z = master
        ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ counter.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One reparameterised draw of all `K` parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct McSample {
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
}

impl McSample {
    /// Realises `theta = sigma * r + mu` for given noise.
    pub fn from_noise(params: &GaussianParamSet, r: Vec<f64>) -> Result<McSample> {
        if r.len() != params.len() {
            return Err(FiresError::DimensionMismatch {
                what: "Monte-Carlo noise",
                expected: params.len(),
                found: r.len(),
            });
        }
        let theta = r
            .iter()
            .zip(params.mu())
            .zip(params.sigma())
            .map(|((r, m), s)| s * r + m)
            .collect();
        Ok(McSample { r, theta })
    }
}

/// Draws `n` samples. Sample `l` uses its own stream derived from `seed`, so
/// the result does not depend on the execution mode.
pub fn draw_samples(
    params: &GaussianParamSet,
    n: usize,
    seed: u64,
    exec: Execution,
) -> Vec<McSample> {
    exec::map_range(exec, n, |l| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x5A, l as u64));
        let r: Vec<f64> = (0..params.len())
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        McSample::from_noise(params, r).expect("noise length matches")
    })
}

/// A model whose positive-class probability is differentiable in `theta`.
pub trait DifferentiableModel: Sync {
    type Cache: Send;

    fn n_params(&self) -> usize;

    fn n_features(&self) -> usize;

    /// Length of the gradient for deterministic (non-Gaussian) parameters.
    fn n_aux(&self) -> usize {
        0
    }

    /// `P(y = +1 | x, theta)` plus whatever the backward pass needs.
    fn forward(&self, theta: &[f64], x: &[f64]) -> (f64, Self::Cache);

    /// Reverse-mode pass: calls `emit(k, scale * dP+/dtheta_k)` for every
    /// parameter with a non-zero derivative and adds `scale * dP+/d aux` into
    /// `aux`.
    fn backward<F: FnMut(usize, f64)>(
        &self,
        theta: &[f64],
        x: &[f64],
        cache: &Self::Cache,
        scale: f64,
        emit: F,
        aux: &mut [f64],
    );
}

#[inline]
fn label_prob(p_pos: f64, y: Label) -> f64 {
    match y {
        Label::Positive => p_pos,
        Label::Negative => 1.0 - p_pos,
    }
}

fn check_inputs<M: DifferentiableModel>(
    model: &M,
    params: &GaussianParamSet,
    x: &[f64],
    samples: &[McSample],
) -> Result<()> {
    if params.len() != model.n_params() {
        return Err(FiresError::DimensionMismatch {
            what: "model parameters",
            expected: model.n_params(),
            found: params.len(),
        });
    }
    if x.len() != model.n_features() {
        return Err(FiresError::DimensionMismatch {
            what: "feature row",
            expected: model.n_features(),
            found: x.len(),
        });
    }
    if samples.is_empty() {
        return Err(FiresError::InvalidConfig(
            "at least one Monte-Carlo sample required".into(),
        ));
    }
    for s in samples {
        if s.r.len() != params.len() || s.theta.len() != params.len() {
            return Err(FiresError::DimensionMismatch {
                what: "Monte-Carlo sample",
                expected: params.len(),
                found: s.r.len().min(s.theta.len()),
            });
        }
    }
    Ok(())
}

/// Sample-mean estimate of `P(y | x, psi)` over the given draws.
pub fn mc_marginal<M: DifferentiableModel>(
    model: &M,
    params: &GaussianParamSet,
    x: &[f64],
    y: Label,
    samples: &[McSample],
) -> Result<f64> {
    check_inputs(model, params, x, samples)?;
    let sum: f64 = samples
        .iter()
        .map(|s| label_prob(model.forward(&s.theta, x).0, y))
        .sum();
    Ok(sum / samples.len() as f64)
}

/// Draws `n_samples` fresh samples from `seed` and returns the marginal with
/// the samples, which [`mc_gradients`] must be given for the gradient pass.
pub fn mc_marginal_seeded<M: DifferentiableModel>(
    model: &M,
    params: &GaussianParamSet,
    x: &[f64],
    y: Label,
    n_samples: usize,
    seed: u64,
) -> Result<(f64, Vec<McSample>)> {
    let samples = draw_samples(params, n_samples, seed, Execution::Sequential);
    let p = mc_marginal(model, params, x, y, &samples)?;
    Ok((p, samples))
}

/// Gradients of the Monte-Carlo marginal with respect to mu and sigma.
pub fn mc_gradients<M: DifferentiableModel>(
    model: &M,
    params: &GaussianParamSet,
    x: &[f64],
    y: Label,
    samples: &[McSample],
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_inputs(model, params, x, samples)?;
    let k = params.len();
    let mut d_mu = vec![0.0; k];
    let mut d_sigma = vec![0.0; k];
    let mut aux = vec![0.0; model.n_aux()];
    let scale = y.sign() / samples.len() as f64;
    for s in samples {
        let (_, cache) = model.forward(&s.theta, x);
        let r = &s.r;
        model.backward(
            &s.theta,
            x,
            &cache,
            scale,
            |k, d| {
                d_mu[k] += d;
                d_sigma[k] += d * r[k];
            },
            &mut aux,
        );
    }
    Ok((d_mu, d_sigma))
}

/// Batch-mean gradients of `log P(y | x, psi)` with respect to mu, sigma
/// and the model's deterministic parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchGradients {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub aux: Vec<f64>,
}

impl BatchGradients {
    fn zeros(k: usize, n_aux: usize) -> Self {
        BatchGradients {
            mu: vec![0.0; k],
            sigma: vec![0.0; k],
            aux: vec![0.0; n_aux],
        }
    }

    fn add(&mut self, other: &BatchGradients) {
        for (a, b) in self.mu.iter_mut().zip(&other.mu) {
            *a += b;
        }
        for (a, b) in self.sigma.iter_mut().zip(&other.sigma) {
            *a += b;
        }
        for (a, b) in self.aux.iter_mut().zip(&other.aux) {
            *a += b;
        }
    }
}

/// Adds `scale * grad log P(y | x, psi)` for one row into `out`. All rows of
/// a batch share the same draws.
fn accumulate_row<M: DifferentiableModel>(
    model: &M,
    x: &[f64],
    y: Label,
    samples: &[McSample],
    scale: f64,
    out: &mut BatchGradients,
) {
    let forwards: Vec<(f64, M::Cache)> =
        samples.iter().map(|s| model.forward(&s.theta, x)).collect();
    let p = forwards.iter().map(|(p, _)| label_prob(*p, y)).sum::<f64>() / samples.len() as f64;
    let s = scale * y.sign() / (samples.len() as f64 * p.max(LIKELIHOOD_FLOOR));
    let BatchGradients { mu, sigma, aux } = out;
    for (sample, (_, cache)) in samples.iter().zip(&forwards) {
        let r = &sample.r;
        model.backward(
            &sample.theta,
            x,
            cache,
            s,
            |k, d| {
                mu[k] += d;
                sigma[k] += d * r[k];
            },
            aux,
        );
    }
}

/// Batch mean of per-row log-likelihood gradients.
///
/// Rows are grouped in fixed chunks; chunk partial sums are added in order on
/// one thread, so the result is identical for every execution mode.
pub fn batch_log_likelihood_gradients<M: DifferentiableModel>(
    model: &M,
    params: &GaussianParamSet,
    batch: &StreamBatch,
    samples: &[McSample],
    exec: Execution,
) -> Result<BatchGradients> {
    if batch.is_empty() {
        return Err(FiresError::EmptyBatch);
    }
    check_inputs(model, params, batch.row(0), samples)?;
    let k = params.len();
    let n_aux = model.n_aux();
    let scale = 1.0 / batch.len() as f64;
    let chunks = exec::chunk_bounds(batch.len(), ROW_CHUNK);
    let exec = if batch.len() * k < PARALLEL_THRESHOLD {
        Execution::Sequential
    } else {
        exec
    };
    let partials = exec::map_slice(exec, &chunks, |&(start, end)| {
        let mut acc = BatchGradients::zeros(k, n_aux);
        for b in start..end {
            accumulate_row(
                model,
                batch.row(b),
                batch.labels()[b],
                samples,
                scale,
                &mut acc,
            );
        }
        acc
    });
    let mut total = BatchGradients::zeros(k, n_aux);
    for p in &partials {
        total.add(p);
    }
    Ok(total)
}
