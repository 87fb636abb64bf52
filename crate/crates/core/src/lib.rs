//! Streaming feature selection with uncertainty-aware importance weights.
//!
//! A base model keeps a Gaussian over each of its parameters. Every batch
//! moves those distributions one gradient-ascent step on the marginal
//! log-likelihood, and each feature is then scored by how large and how
//! certain its parameters are. The top `M` features form the selection.

pub mod engine;
pub mod error;
pub mod exec;
pub mod harness;
pub mod models;
pub mod prob;
pub mod stability;
pub mod weighting;

pub use engine::{select_top_m, EngineConfig, FiresEngine, SelectionMask};
pub use error::{ErrorKind, FiresError, Result};
pub use exec::Execution;
pub use models::{BaseModel, ModelConfig, ModelKind};
pub use prob::GaussianParamSet;
pub use stability::{stability_of, StabilityWindow};
pub use weighting::{compute_weights, FeatureWeights, WeightConfig};
