//! Soft decision tree base model.
//!
//! A complete binary tree of depth `d` with `N = 2^d - 1` inner nodes stored
//! in heap order (children of `n` are `2n + 1` left and `2n + 2` right). Inner
//! node `n` routes right with probability `p_n(x) = logistic(theta_n . x)`;
//! gate weights are Gaussian and enter feature weighting. Each of the `2^d`
//! leaves holds a deterministic logit `v`, and
//! `P(+1 | x) = sum_leaf path_prob(leaf) * logistic(v_leaf)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{FiresError, Result};
use crate::harness::data::StreamBatch;
use crate::prob::{logistic, GaussianParamSet};

use super::mc::DifferentiableModel;

const ALPHA_CLAMP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SdtModel {
    depth: usize,
    n_features: usize,
    /// Gate parameters, node-major: `theta[n * J + j]`.
    pub params: GaussianParamSet,
    pub leaves: Vec<f64>,
    pub penalty: f64,
    pub mc_samples: usize,
}

impl SdtModel {
    /// Gates start standard normal; leaf logits are drawn from N(0, 1) using
    /// `seed` so that routing receives a gradient from the first batch.
    pub fn new(
        n_features: usize,
        depth: usize,
        penalty: f64,
        mc_samples: usize,
        seed: u64,
    ) -> Result<Self> {
        if n_features == 0 || depth == 0 || depth > 16 {
            return Err(FiresError::InvalidConfig(format!(
                "SDT needs n_features >= 1 and depth in 1..=16, got {n_features}, {depth}"
            )));
        }
        if mc_samples == 0 {
            return Err(FiresError::InvalidConfig("mc_samples must be >= 1".into()));
        }
        if !(penalty.is_finite() && penalty >= 0.0) {
            return Err(FiresError::InvalidConfig(format!(
                "SDT penalty must be >= 0, got {penalty}"
            )));
        }
        let n_inner = (1 << depth) - 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let leaves = (0..1usize << depth)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        Ok(SdtModel {
            depth,
            n_features,
            params: GaussianParamSet::standard(n_inner * n_features),
            leaves,
            penalty,
            mc_samples,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_inner(&self) -> usize {
        (1 << self.depth) - 1
    }

    pub fn n_leaves(&self) -> usize {
        1 << self.depth
    }

    /// Gate probabilities `p_n` for every inner node.
    fn gates(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        let j = self.n_features;
        (0..self.n_inner())
            .map(|n| {
                let z: f64 = theta[n * j..(n + 1) * j]
                    .iter()
                    .zip(x)
                    .map(|(t, x)| t * x)
                    .sum();
                logistic(z)
            })
            .collect()
    }

    /// Probability of reaching every node (inner nodes, then leaves in
    /// heap order `N..2N+1`).
    fn reach(&self, gates: &[f64]) -> Vec<f64> {
        let n_inner = self.n_inner();
        let mut reach = vec![0.0; 2 * n_inner + 1];
        reach[0] = 1.0;
        for n in 0..n_inner {
            reach[2 * n + 1] = reach[n] * (1.0 - gates[n]);
            reach[2 * n + 2] = reach[n] * gates[n];
        }
        reach
    }

    /// Path probabilities of the leaves, left to right.
    pub fn leaf_probabilities(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        let gates = self.gates(theta, x);
        self.reach(&gates)[self.n_inner()..].to_vec()
    }

    /// Collapses the `N x J` gate parameters to one (mu, sigma) per input by
    /// averaging over inner nodes.
    pub fn aggregate(&self) -> GaussianParamSet {
        aggregate_node_major(&self.params, self.n_inner(), self.n_features)
    }

    /// Gradient of `-penalty` with respect to the gate weights for one
    /// parameter draw over a batch.
    ///
    /// The penalty pushes every inner node towards an even split of the
    /// batch's probability mass: `alpha_n = sum_b reach_nb p_nb / sum_b reach_nb`
    /// and `C = -sum_n coef 2^-depth(n) (log alpha_n + log(1 - alpha_n)) / 2`.
    /// Derivatives flow through the node's own gate and through the gates of
    /// its ancestors (via `reach`).
    pub fn penalty_gradient(&self, theta: &[f64], batch: &StreamBatch) -> Vec<f64> {
        let j = self.n_features;
        let n_inner = self.n_inner();
        let mut grad = vec![0.0; theta.len()];
        if self.penalty == 0.0 {
            return grad;
        }
        let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..batch.len())
            .map(|b| {
                let g = self.gates(theta, batch.row(b));
                let r = self.reach(&g);
                (g, r)
            })
            .collect();
        // dObjective/dz for each (row, node)
        let mut dz = vec![0.0; batch.len() * n_inner];
        for n in 0..n_inner {
            let mass: f64 = rows.iter().map(|(_, r)| r[n]).sum();
            if mass < 1e-12 {
                continue;
            }
            let alpha = (rows.iter().map(|(g, r)| r[n] * g[n]).sum::<f64>() / mass)
                .clamp(ALPHA_CLAMP, 1.0 - ALPHA_CLAMP);
            let level = usize::BITS - 1 - (n + 1).leading_zeros();
            let coef = self.penalty * 0.5f64.powi(level as i32);
            // objective = -C, so d(-C)/d alpha = coef/2 * (1/alpha - 1/(1 - alpha))
            let d_alpha = 0.5 * coef * (1.0 / alpha - 1.0 / (1.0 - alpha));
            for (b, (g, r)) in rows.iter().enumerate() {
                let base = b * n_inner;
                dz[base + n] += d_alpha * r[n] * g[n] * (1.0 - g[n]) / mass;
                // ancestors: d reach_n / d z_m = reach_n * (1 - p_m) if n lies
                // right of m, -reach_n * p_m if left
                let d_reach_factor = (g[n] - alpha) * r[n] / mass;
                let mut child = n;
                while child > 0 {
                    let m = (child - 1) / 2;
                    let went_right = child == 2 * m + 2;
                    let d = if went_right { 1.0 - g[m] } else { -g[m] };
                    dz[base + m] += d_alpha * d_reach_factor * d;
                    child = m;
                }
            }
        }
        for b in 0..batch.len() {
            let x = batch.row(b);
            for n in 0..n_inner {
                let d = dz[b * n_inner + n];
                if d == 0.0 {
                    continue;
                }
                for (g, &xv) in grad[n * j..(n + 1) * j].iter_mut().zip(x) {
                    *g += d * xv;
                }
            }
        }
        grad
    }
}

/// Mean over `n_nodes` blocks of a node-major parameter set.
pub fn aggregate_node_major(
    params: &GaussianParamSet,
    n_nodes: usize,
    n_features: usize,
) -> GaussianParamSet {
    let mut mu = vec![0.0; n_features];
    let mut sigma = vec![0.0; n_features];
    for n in 0..n_nodes {
        let block = n * n_features..(n + 1) * n_features;
        for (a, v) in mu.iter_mut().zip(&params.mu()[block.clone()]) {
            *a += v;
        }
        for (a, v) in sigma.iter_mut().zip(&params.sigma()[block]) {
            *a += v;
        }
    }
    let inv = 1.0 / n_nodes as f64;
    mu.iter_mut().for_each(|v| *v *= inv);
    sigma.iter_mut().for_each(|v| *v *= inv);
    GaussianParamSet::new(mu, sigma).expect("aggregated parameters are finite")
}

pub struct SdtCache {
    gates: Vec<f64>,
    reach: Vec<f64>,
    leaf_probs: Vec<f64>,
}

impl DifferentiableModel for SdtModel {
    type Cache = SdtCache;

    fn n_params(&self) -> usize {
        self.params.len()
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn n_aux(&self) -> usize {
        self.n_leaves()
    }

    fn forward(&self, theta: &[f64], x: &[f64]) -> (f64, SdtCache) {
        let gates = self.gates(theta, x);
        let reach = self.reach(&gates);
        let leaf_probs: Vec<f64> = self.leaves.iter().map(|&v| logistic(v)).collect();
        let p = reach[self.n_inner()..]
            .iter()
            .zip(&leaf_probs)
            .map(|(r, q)| r * q)
            .sum();
        (
            p,
            SdtCache {
                gates,
                reach,
                leaf_probs,
            },
        )
    }

    fn backward<F: FnMut(usize, f64)>(
        &self,
        _theta: &[f64],
        x: &[f64],
        cache: &SdtCache,
        scale: f64,
        mut emit: F,
        aux: &mut [f64],
    ) {
        let n_inner = self.n_inner();
        let j = self.n_features;
        // expected leaf probability below every node, bottom-up
        let mut value = vec![0.0; 2 * n_inner + 1];
        value[n_inner..].copy_from_slice(&cache.leaf_probs);
        for n in (0..n_inner).rev() {
            let p = cache.gates[n];
            value[n] = p * value[2 * n + 2] + (1.0 - p) * value[2 * n + 1];
        }
        for (l, (a, &q)) in aux.iter_mut().zip(&cache.leaf_probs).enumerate() {
            *a += scale * cache.reach[n_inner + l] * q * (1.0 - q);
        }
        for n in 0..n_inner {
            let p = cache.gates[n];
            let dz = scale * cache.reach[n] * p * (1.0 - p) * (value[2 * n + 2] - value[2 * n + 1]);
            if dz == 0.0 {
                continue;
            }
            for (jj, &xv) in x.iter().enumerate() {
                if xv != 0.0 {
                    emit(n * j + jj, dz * xv);
                }
            }
        }
    }
}
