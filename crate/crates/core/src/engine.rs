//! The per-time-step feature weighting loop.
//!
//! For every batch: average the per-row log-likelihood gradients, take one
//! gradient-ascent step on (mu, sigma), floor sigma, aggregate to one pair per
//! feature if the model has more parameters than features, compute weights
//! and keep the `M` highest-weighted features.

use crate::error::{FiresError, Result};
use crate::exec::Execution;
use crate::harness::data::StreamBatch;
use crate::models::{mc::derive_seed, BaseModel, ModelConfig};
use crate::weighting::{compute_weights, FeatureWeights, WeightConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub alpha_mu: f64,
    pub alpha_sigma: f64,
    pub weights: WeightConfig,
    pub n_selected: usize,
    pub model: ModelConfig,
    /// Master seed; every Monte-Carlo draw derives from it and the time step.
    pub seed: u64,
    pub exec: Execution,
}

impl EngineConfig {
    pub fn new(model: ModelConfig, n_selected: usize) -> Self {
        EngineConfig {
            alpha_mu: 0.01,
            alpha_sigma: 0.01,
            weights: WeightConfig::default(),
            n_selected,
            model,
            seed: 0,
            exec: Execution::default(),
        }
    }

    fn validate(&self, n_features: usize) -> Result<()> {
        for (name, v) in [
            ("alpha_mu", self.alpha_mu),
            ("alpha_sigma", self.alpha_sigma),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(FiresError::InvalidConfig(format!(
                    "{name} must be > 0, got {v}"
                )));
            }
        }
        if self.n_selected == 0 || self.n_selected > n_features {
            return Err(FiresError::SelectionOutOfRange {
                m: self.n_selected,
                n_features,
            });
        }
        Ok(())
    }
}

/// The `M` selected feature indices (ascending) and the weights they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionMask {
    selected: Vec<usize>,
    n_features: usize,
    pub omega_snapshot: Option<FeatureWeights>,
}

impl SelectionMask {
    /// Every feature selected; used before the first weights exist.
    pub fn all(n_features: usize) -> Self {
        SelectionMask {
            selected: (0..n_features).collect(),
            n_features,
            omega_snapshot: None,
        }
    }

    /// Mask from explicit indices. Duplicates and out-of-range indices are
    /// rejected.
    pub fn from_indices(mut selected: Vec<usize>, n_features: usize) -> Result<Self> {
        selected.sort_unstable();
        selected.dedup();
        if selected.last().is_some_and(|&i| i >= n_features) {
            return Err(FiresError::InvalidConfig(format!(
                "selected index out of range for {n_features} features"
            )));
        }
        Ok(SelectionMask {
            selected,
            n_features,
            omega_snapshot: None,
        })
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn contains(&self, j: usize) -> bool {
        self.selected.binary_search(&j).is_ok()
    }

    /// Indicator vector of length `J`.
    pub fn indicator(&self) -> Vec<bool> {
        let mut v = vec![false; self.n_features];
        for &j in &self.selected {
            v[j] = true;
        }
        v
    }
}

/// The `m` largest weights; ties go to the lower feature index.
pub fn select_top_m(weights: &FeatureWeights, m: usize) -> Result<SelectionMask> {
    let j = weights.len();
    if m == 0 || m > j {
        return Err(FiresError::SelectionOutOfRange { m, n_features: j });
    }
    let mut selected: Vec<usize> = weights.ranking().into_iter().take(m).collect();
    selected.sort_unstable();
    Ok(SelectionMask {
        selected,
        n_features: j,
        omega_snapshot: Some(weights.clone()),
    })
}

/// One feature selector bound to one stream.
#[derive(Debug, Clone)]
pub struct FiresEngine {
    model: BaseModel,
    cfg: EngineConfig,
    t: u64,
}

impl FiresEngine {
    pub fn new(cfg: EngineConfig, n_features: usize) -> Result<Self> {
        cfg.validate(n_features)?;
        let model = BaseModel::new(&cfg.model, n_features, cfg.seed)?;
        Ok(FiresEngine { model, cfg, t: 0 })
    }

    pub fn model(&self) -> &BaseModel {
        &self.model
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    /// Number of completed steps.
    pub fn timestep(&self) -> u64 {
        self.t
    }

    /// Current weights without updating the model.
    pub fn weights(&self) -> FeatureWeights {
        compute_weights(&self.model.feature_params(), &self.cfg.weights, self.t)
    }

    /// Processes one batch: update, then weight, then select.
    pub fn step(&mut self, batch: &StreamBatch) -> Result<(SelectionMask, FeatureWeights)> {
        if batch.is_empty() {
            return Err(FiresError::EmptyBatch);
        }
        let t = self.t + 1;
        let seed = derive_seed(self.cfg.seed, 0xF1E5, t);
        let grads = self.model.batch_gradients(batch, seed, self.cfg.exec)?;
        self.model
            .apply(&grads, self.cfg.alpha_mu, self.cfg.alpha_sigma)?;
        self.t = t;
        let weights = compute_weights(&self.model.feature_params(), &self.cfg.weights, t);
        let mask = select_top_m(&weights, self.cfg.n_selected)?;
        Ok((mask, weights))
    }
}
