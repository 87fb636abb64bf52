//! Base models that turn a batch into gradients on the Gaussian parameters.

pub mod ann;
pub mod glm;
pub mod mc;
pub mod sdt;

use serde::{Deserialize, Serialize};

use crate::error::{FiresError, Result};
use crate::exec::Execution;
use crate::harness::data::StreamBatch;
use crate::prob::GaussianParamSet;

pub use ann::AnnModel;
pub use glm::GlmModel;
pub use mc::{BatchGradients, McSample};
pub use sdt::SdtModel;

/// Likelihoods are clamped to at least this before the `1/P` of `grad log P`.
pub const LIKELIHOOD_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Glm,
    Ann,
    Sdt,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Glm => "glm",
            ModelKind::Ann => "ann",
            ModelKind::Sdt => "sdt",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub ann_hidden: Vec<usize>,
    pub mc_samples: usize,
    pub sdt_depth: usize,
    pub sdt_penalty: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            kind: ModelKind::Glm,
            ann_hidden: ann::DEFAULT_HIDDEN.to_vec(),
            mc_samples: 5,
            sdt_depth: 3,
            sdt_penalty: 0.01,
        }
    }
}

impl ModelConfig {
    pub fn with_kind(kind: ModelKind) -> Self {
        ModelConfig {
            kind,
            ..ModelConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BaseModel {
    Glm(GlmModel),
    Ann(AnnModel),
    Sdt(SdtModel),
}

impl BaseModel {
    /// `seed` only affects models with randomly initialised deterministic
    /// parts (SDT leaves).
    pub fn new(cfg: &ModelConfig, n_features: usize, seed: u64) -> Result<Self> {
        if n_features == 0 {
            return Err(FiresError::InvalidConfig("stream has no features".into()));
        }
        Ok(match cfg.kind {
            ModelKind::Glm => BaseModel::Glm(GlmModel::new(n_features)),
            ModelKind::Ann => {
                BaseModel::Ann(AnnModel::new(n_features, &cfg.ann_hidden, cfg.mc_samples)?)
            }
            ModelKind::Sdt => BaseModel::Sdt(SdtModel::new(
                n_features,
                cfg.sdt_depth,
                cfg.sdt_penalty,
                cfg.mc_samples,
                mc::derive_seed(seed, 0x1EAF, 0),
            )?),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            BaseModel::Glm(_) => ModelKind::Glm,
            BaseModel::Ann(_) => ModelKind::Ann,
            BaseModel::Sdt(_) => ModelKind::Sdt,
        }
    }

    pub fn params(&self) -> &GaussianParamSet {
        match self {
            BaseModel::Glm(m) => &m.params,
            BaseModel::Ann(m) => &m.params,
            BaseModel::Sdt(m) => &m.params,
        }
    }

    pub fn n_features(&self) -> usize {
        use mc::DifferentiableModel;
        match self {
            BaseModel::Glm(m) => m.params.len(),
            BaseModel::Ann(m) => m.n_features(),
            BaseModel::Sdt(m) => m.n_features(),
        }
    }

    /// Batch-mean gradient of the training objective. MC models draw their
    /// parameter samples from `sample_seed`.
    pub fn batch_gradients(
        &self,
        batch: &StreamBatch,
        sample_seed: u64,
        exec: Execution,
    ) -> Result<BatchGradients> {
        if batch.is_empty() {
            return Err(FiresError::EmptyBatch);
        }
        if batch.n_features() != self.n_features() {
            return Err(FiresError::DimensionMismatch {
                what: "batch features",
                expected: self.n_features(),
                found: batch.n_features(),
            });
        }
        match self {
            BaseModel::Glm(m) => {
                let (mu, sigma) = m.batch_log_likelihood_gradients(batch)?;
                Ok(BatchGradients {
                    mu,
                    sigma,
                    aux: Vec::new(),
                })
            }
            BaseModel::Ann(m) => {
                let samples = mc::draw_samples(&m.params, m.mc_samples, sample_seed, exec);
                mc::batch_log_likelihood_gradients(m, &m.params, batch, &samples, exec)
            }
            BaseModel::Sdt(m) => {
                let samples = mc::draw_samples(&m.params, m.mc_samples, sample_seed, exec);
                let mut grads =
                    mc::batch_log_likelihood_gradients(m, &m.params, batch, &samples, exec)?;
                if m.penalty > 0.0 {
                    let inv = 1.0 / samples.len() as f64;
                    for s in &samples {
                        let pg = m.penalty_gradient(&s.theta, batch);
                        for (k, g) in pg.iter().enumerate() {
                            grads.mu[k] += inv * g;
                            grads.sigma[k] += inv * g * s.r[k];
                        }
                    }
                }
                Ok(grads)
            }
        }
    }

    /// Gradient-ascent step on the Gaussian parameters (and SDT leaves,
    /// which follow the mu learning rate).
    pub fn apply(&mut self, grads: &BatchGradients, alpha_mu: f64, alpha_sigma: f64) -> Result<()> {
        match self {
            BaseModel::Glm(m) => m
                .params
                .ascend(&grads.mu, &grads.sigma, alpha_mu, alpha_sigma),
            BaseModel::Ann(m) => m
                .params
                .ascend(&grads.mu, &grads.sigma, alpha_mu, alpha_sigma),
            BaseModel::Sdt(m) => {
                if grads.aux.iter().any(|g| !(alpha_mu * g).is_finite()) {
                    return Err(FiresError::NonFinite("SDT leaf update"));
                }
                m.params
                    .ascend(&grads.mu, &grads.sigma, alpha_mu, alpha_sigma)?;
                for (v, g) in m.leaves.iter_mut().zip(&grads.aux) {
                    *v += alpha_mu * g;
                }
                Ok(())
            }
        }
    }

    /// One (mu, sigma) pair per input feature, aggregating when the model
    /// has more parameters than features.
    pub fn feature_params(&self) -> GaussianParamSet {
        match self {
            BaseModel::Glm(m) => m.params.clone(),
            BaseModel::Ann(m) if m.params.len() > m.layer_sizes()[0] => m.aggregate(),
            BaseModel::Ann(m) => m.params.clone(),
            BaseModel::Sdt(m) => m.aggregate(),
        }
    }
}
