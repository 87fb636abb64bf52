//! Fully-connected network base model.
//!
//! Weights only (no biases), rectifier hidden units and a single logistic
//! output giving `P(y = +1 | x)`. The weight from node `n` of layer `h` to
//! node `i` of layer `h + 1` lives at `offset[h] + n * width[h + 1] + i`.

use crate::error::{FiresError, Result};
use crate::prob::{logistic, GaussianParamSet};

use super::mc::DifferentiableModel;

#[derive(Debug, Clone, PartialEq)]
pub struct AnnModel {
    layer_sizes: Vec<usize>,
    offsets: Vec<usize>,
    pub params: GaussianParamSet,
    pub mc_samples: usize,
}

pub const DEFAULT_HIDDEN: [usize; 3] = [100, 100, 100];

impl AnnModel {
    /// Network `n_features -> hidden... -> 1` with standard-normal parameters.
    pub fn new(n_features: usize, hidden: &[usize], mc_samples: usize) -> Result<Self> {
        if n_features == 0 || hidden.contains(&0) {
            return Err(FiresError::InvalidConfig(
                "layer sizes must be positive".into(),
            ));
        }
        if mc_samples == 0 {
            return Err(FiresError::InvalidConfig("mc_samples must be >= 1".into()));
        }
        let mut layer_sizes = Vec::with_capacity(hidden.len() + 2);
        layer_sizes.push(n_features);
        layer_sizes.extend_from_slice(hidden);
        layer_sizes.push(1);
        let mut offsets = Vec::with_capacity(layer_sizes.len() - 1);
        let mut k = 0;
        for w in layer_sizes.windows(2) {
            offsets.push(k);
            k += w[0] * w[1];
        }
        Ok(AnnModel {
            layer_sizes,
            offsets,
            params: GaussianParamSet::standard(k),
            mc_samples,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    /// Index of the weight `n -> i` between layers `h` and `h + 1`.
    pub fn weight_index(&self, h: usize, n: usize, i: usize) -> usize {
        self.offsets[h] + n * self.layer_sizes[h + 1] + i
    }

    /// Collapses the network's parameters to one (mu, sigma) per input.
    ///
    /// For input `j` the first weight layer contributes the mean of the
    /// weights leaving `j`; every deeper layer lies wholly on `j`'s path in a
    /// dense net and contributes the mean of all its weights. Contributions
    /// are summed over layers, identically for mu and for sigma.
    pub fn aggregate(&self) -> GaussianParamSet {
        let j = self.layer_sizes[0];
        let (mu, sigma) = (self.params.mu(), self.params.sigma());
        let mut shared_mu = 0.0;
        let mut shared_sigma = 0.0;
        for h in 1..self.offsets.len() {
            let start = self.offsets[h];
            let len = self.layer_sizes[h] * self.layer_sizes[h + 1];
            shared_mu += mu[start..start + len].iter().sum::<f64>() / len as f64;
            shared_sigma += sigma[start..start + len].iter().sum::<f64>() / len as f64;
        }
        let width = self.layer_sizes[1];
        let mut agg_mu = Vec::with_capacity(j);
        let mut agg_sigma = Vec::with_capacity(j);
        for n in 0..j {
            let row = n * width..(n + 1) * width;
            agg_mu.push(mu[row.clone()].iter().sum::<f64>() / width as f64 + shared_mu);
            agg_sigma.push(sigma[row].iter().sum::<f64>() / width as f64 + shared_sigma);
        }
        GaussianParamSet::new(agg_mu, agg_sigma).expect("aggregated parameters are finite")
    }
}

/// Post-activation values of every hidden layer and the output probability.
pub struct AnnCache {
    hidden: Vec<Vec<f64>>,
    p: f64,
}

impl DifferentiableModel for AnnModel {
    type Cache = AnnCache;

    fn n_params(&self) -> usize {
        self.params.len()
    }

    fn n_features(&self) -> usize {
        self.layer_sizes[0]
    }

    fn forward(&self, theta: &[f64], x: &[f64]) -> (f64, AnnCache) {
        let n_layers = self.offsets.len();
        let mut hidden: Vec<Vec<f64>> = Vec::with_capacity(n_layers - 1);
        let mut logit = 0.0;
        for h in 0..n_layers {
            let input: &[f64] = if h == 0 { x } else { &hidden[h - 1] };
            let out_w = self.layer_sizes[h + 1];
            let mut z = vec![0.0; out_w];
            for (n, &a) in input.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let start = self.offsets[h] + n * out_w;
                for (zi, w) in z.iter_mut().zip(&theta[start..start + out_w]) {
                    *zi += a * w;
                }
            }
            if h + 1 == n_layers {
                logit = z[0];
            } else {
                for v in z.iter_mut() {
                    *v = v.max(0.0);
                }
                hidden.push(z);
            }
        }
        let p = logistic(logit);
        (p, AnnCache { hidden, p })
    }

    fn backward<F: FnMut(usize, f64)>(
        &self,
        theta: &[f64],
        x: &[f64],
        cache: &AnnCache,
        scale: f64,
        mut emit: F,
        _aux: &mut [f64],
    ) {
        let n_layers = self.offsets.len();
        // dP/dlogit of the output unit
        let mut delta = vec![scale * cache.p * (1.0 - cache.p)];
        for h in (0..n_layers).rev() {
            let input: &[f64] = if h == 0 { x } else { &cache.hidden[h - 1] };
            let out_w = self.layer_sizes[h + 1];
            let mut prev = if h > 0 {
                vec![0.0; input.len()]
            } else {
                Vec::new()
            };
            for (n, &a) in input.iter().enumerate() {
                let start = self.offsets[h] + n * out_w;
                if a != 0.0 {
                    for (i, &d) in delta.iter().enumerate() {
                        emit(start + i, a * d);
                    }
                }
                // rectifier derivative: zero where the unit was inactive
                if h > 0 && a > 0.0 {
                    prev[n] = theta[start..start + out_w]
                        .iter()
                        .zip(&delta)
                        .map(|(w, d)| w * d)
                        .sum();
                }
            }
            delta = prev;
        }
    }
}
