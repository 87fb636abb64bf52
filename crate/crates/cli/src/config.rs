//! Experiment configuration, read from TOML (or JSON, the format of the echo
//! written into every metrics file).

use std::path::{Path, PathBuf};

use fires_core::harness::{LabelColumn, TreeStreamConfig};
use fires_core::{EngineConfig, Execution, ModelConfig, ModelKind, WeightConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub fires: FiresSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataConfig {
    Csv {
        path: PathBuf,
        /// Column index or header name; the last column when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<LabelKey>,
        /// Stream the rows in a seeded random order instead of file order.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shuffle_seed: Option<u64>,
    },
    Rbf {
        n_samples: usize,
        n_features: usize,
        #[serde(default = "default_centroids")]
        n_centroids: usize,
        #[serde(default)]
        seed: u64,
    },
    Tree {
        n_samples: usize,
        n_num_features: usize,
        #[serde(default)]
        n_cat_features: usize,
        #[serde(default)]
        n_cat_values: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_relevant: Option<usize>,
        #[serde(default = "default_depth")]
        max_depth: usize,
        #[serde(default)]
        label_noise: f64,
        #[serde(default)]
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelKey {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "default_kind")]
    pub kind: ModelKind,
    #[serde(default = "default_hidden")]
    pub ann_hidden: Vec<usize>,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default = "default_sdt_depth")]
    pub sdt_depth: usize,
    #[serde(default = "default_small")]
    pub sdt_penalty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiresSection {
    #[serde(default = "default_small")]
    pub alpha_mu: f64,
    #[serde(default = "default_small")]
    pub alpha_sigma: f64,
    #[serde(default = "default_small")]
    pub lambda_s: f64,
    #[serde(default = "default_small")]
    pub lambda_r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_selected: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    /// Selection fractions of a grid run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fractions: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    /// Batch sizes of a grid run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_sizes: Option<Vec<usize>>,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_parallel")]
    pub parallel: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_centroids() -> usize {
    50
}
fn default_depth() -> usize {
    5
}
fn default_kind() -> ModelKind {
    ModelKind::Glm
}
fn default_hidden() -> Vec<usize> {
    ModelConfig::default().ann_hidden
}
fn default_mc_samples() -> usize {
    5
}
fn default_sdt_depth() -> usize {
    3
}
fn default_small() -> f64 {
    0.01
}
fn default_window() -> usize {
    10
}
fn default_parallel() -> bool {
    true
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            kind: default_kind(),
            ann_hidden: default_hidden(),
            mc_samples: default_mc_samples(),
            sdt_depth: default_sdt_depth(),
            sdt_penalty: default_small(),
        }
    }
}

impl Default for FiresSection {
    fn default() -> Self {
        FiresSection {
            alpha_mu: default_small(),
            alpha_sigma: default_small(),
            lambda_s: default_small(),
            lambda_r: default_small(),
            n_selected: None,
            fraction: None,
            fractions: None,
        }
    }
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            batch_size: None,
            batch_sizes: None,
            window: default_window(),
            seed: 0,
            parallel: true,
            out: None,
        }
    }
}

/// How many features to keep in a single run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selection {
    Count(usize),
    Fraction(f64),
}

/// What `run` executes once the config has been checked.
#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    Single {
        batch_size: usize,
        selection: Selection,
    },
    Grid {
        batch_sizes: Vec<usize>,
        fractions: Vec<f64>,
    },
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        } else {
            Self::from_toml(&text).map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
                other => other,
            })
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.plan()?;
        Ok(cfg)
    }

    /// Checks the field combinations serde cannot express.
    pub fn plan(&self) -> Result<Plan, CliError> {
        let f = &self.fires;
        for (name, v) in [
            ("fires.alpha_mu", f.alpha_mu),
            ("fires.alpha_sigma", f.alpha_sigma),
            ("fires.lambda_r", f.lambda_r),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if !(f.lambda_s.is_finite() && f.lambda_s >= 0.0) {
            return Err(invalid(
                "fires.lambda_s",
                format!("must be >= 0, got {}", f.lambda_s),
            ));
        }
        if self.model.mc_samples == 0 {
            return Err(invalid("model.mc_samples", "must be positive"));
        }
        if self.run.window < 2 {
            return Err(invalid("run.window", "must be at least 2"));
        }
        for fr in f.fraction.iter().chain(f.fractions.iter().flatten()) {
            if !(*fr > 0.0 && *fr <= 1.0) {
                return Err(invalid(
                    "fires.fraction",
                    format!("must lie in (0, 1], got {fr}"),
                ));
            }
        }
        let n_choices = [
            f.n_selected.is_some(),
            f.fraction.is_some(),
            f.fractions.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if n_choices != 1 {
            return Err(invalid(
                "fires",
                "set exactly one of n_selected, fraction or fractions",
            ));
        }
        if f.n_selected == Some(0) {
            return Err(invalid("fires.n_selected", "must be positive"));
        }
        let r = &self.run;
        let batch_sizes = match (r.batch_size, &r.batch_sizes) {
            (Some(b), None) => vec![b],
            (None, Some(bs)) if !bs.is_empty() => bs.clone(),
            (None, Some(_)) => return Err(invalid("run.batch_sizes", "must not be empty")),
            _ => {
                return Err(invalid(
                    "run",
                    "set exactly one of batch_size or batch_sizes",
                ))
            }
        };
        if batch_sizes.contains(&0) {
            return Err(invalid("run.batch_size", "must be positive"));
        }
        if r.batch_sizes.is_some() || f.fractions.is_some() {
            let fractions = match (&f.fractions, f.fraction) {
                (Some(fs), _) if !fs.is_empty() => fs.clone(),
                (None, Some(fr)) => vec![fr],
                (Some(_), _) => return Err(invalid("fires.fractions", "must not be empty")),
                _ => {
                    return Err(invalid(
                        "fires",
                        "a grid run selects by fraction(s), not n_selected",
                    ))
                }
            };
            return Ok(Plan::Grid {
                batch_sizes,
                fractions,
            });
        }
        let selection = match (f.n_selected, f.fraction) {
            (Some(m), _) => Selection::Count(m),
            (_, Some(fr)) => Selection::Fraction(fr),
            _ => unreachable!("exactly one selection field is set"),
        };
        Ok(Plan::Single {
            batch_size: batch_sizes[0],
            selection,
        })
    }

    /// Engine settings; `n_selected` is filled in once the feature count is known.
    pub fn engine(&self, n_selected: usize) -> Result<EngineConfig, CliError> {
        let m = &self.model;
        let model = ModelConfig {
            kind: m.kind,
            ann_hidden: m.ann_hidden.clone(),
            mc_samples: m.mc_samples,
            sdt_depth: m.sdt_depth,
            sdt_penalty: m.sdt_penalty,
        };
        let mut cfg = EngineConfig::new(model, n_selected);
        cfg.alpha_mu = self.fires.alpha_mu;
        cfg.alpha_sigma = self.fires.alpha_sigma;
        cfg.weights = WeightConfig::new(self.fires.lambda_s, self.fires.lambda_r)?;
        cfg.seed = self.run.seed;
        cfg.exec = if self.run.parallel {
            Execution::Parallel
        } else {
            Execution::Sequential
        };
        Ok(cfg)
    }
}

impl LabelKey {
    pub fn column(key: Option<&LabelKey>) -> LabelColumn {
        match key {
            None => LabelColumn::Last,
            Some(LabelKey::Index(i)) => LabelColumn::Index(*i),
            Some(LabelKey::Name(n)) => LabelColumn::Name(n.clone()),
        }
    }
}

impl DataConfig {
    pub fn tree_config(&self) -> Option<TreeStreamConfig> {
        match *self {
            DataConfig::Tree {
                n_num_features,
                n_cat_features,
                n_cat_values,
                n_relevant,
                max_depth,
                label_noise,
                seed,
                ..
            } => {
                let mut cfg =
                    TreeStreamConfig::new(seed, n_num_features, n_cat_features, n_cat_values);
                if let Some(k) = n_relevant {
                    cfg.n_relevant = k;
                }
                cfg.max_depth = max_depth;
                cfg.label_noise = label_noise;
                Some(cfg)
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[data]
source = "csv"
path = "data.csv"

[fires]
n_selected = 2

[run]
batch_size = 10
"#;

    #[test]
    fn minimal_defaults() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.model.kind, ModelKind::Glm);
        assert_eq!(cfg.model.ann_hidden, vec![100, 100, 100]);
        assert_eq!(cfg.model.mc_samples, 5);
        assert_eq!(cfg.model.sdt_depth, 3);
        assert_eq!(
            (cfg.fires.alpha_mu, cfg.fires.lambda_s, cfg.fires.lambda_r),
            (0.01, 0.01, 0.01)
        );
        assert_eq!(cfg.run.window, 10);
        assert_eq!(
            cfg.plan().unwrap(),
            Plan::Single {
                batch_size: 10,
                selection: Selection::Count(2)
            }
        );
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("n_selected = 2", "n_selected = 2\nlambda = 0.5");
        let err = RunConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("lambda"), "{err}");
        let text = MINIMAL.replace("path = \"data.csv\"", "path = \"data.csv\"\nn_features = 3");
        assert!(RunConfig::from_toml(&text).is_err());
    }

    #[test]
    fn missing_data_section() {
        let err = RunConfig::from_toml("[run]\nbatch_size = 5\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("data"), "{err}");
    }

    #[test]
    fn grid_plan() {
        let text = MINIMAL
            .replace("n_selected = 2", "fractions = [0.1, 0.2]")
            .replace("batch_size = 10", "batch_sizes = [25, 50]");
        let cfg = RunConfig::from_toml(&text).unwrap();
        assert_eq!(
            cfg.plan().unwrap(),
            Plan::Grid {
                batch_sizes: vec![25, 50],
                fractions: vec![0.1, 0.2]
            }
        );
    }

    #[test]
    fn conflicting_fields() {
        let both = MINIMAL.replace("n_selected = 2", "n_selected = 2\nfraction = 0.5");
        assert!(RunConfig::from_toml(&both)
            .unwrap_err()
            .to_string()
            .contains("fires"));
        let grid_count = MINIMAL.replace("batch_size = 10", "batch_sizes = [10]");
        assert!(RunConfig::from_toml(&grid_count).is_err());
        let bad_fraction = MINIMAL.replace("n_selected = 2", "fraction = 1.5");
        assert!(RunConfig::from_toml(&bad_fraction)
            .unwrap_err()
            .to_string()
            .contains("fires.fraction"));
        let no_batch = MINIMAL.replace("batch_size = 10", "");
        assert!(RunConfig::from_toml(&no_batch).is_err());
    }

    #[test]
    fn json_echo_round_trip() {
        let text = r#"
[data]
source = "tree"
n_samples = 100
n_num_features = 6
n_cat_features = 1
n_cat_values = 3
label_noise = 0.1

[model]
kind = "sdt"

[fires]
fraction = 0.5

[run]
batch_size = 20
seed = 7
"#;
        let cfg = RunConfig::from_toml(text).unwrap();
        let echo = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&echo).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.data.tree_config().unwrap().n_features(), 9);
    }

    #[test]
    fn label_by_name_or_index() {
        let text = MINIMAL.replace("path = \"data.csv\"", "path = \"d.csv\"\nlabel = \"class\"");
        let cfg = RunConfig::from_toml(&text).unwrap();
        let DataConfig::Csv { label, .. } = &cfg.data else {
            panic!()
        };
        assert_eq!(
            LabelKey::column(label.as_ref()),
            LabelColumn::Name("class".into())
        );
        let text = MINIMAL.replace("path = \"data.csv\"", "path = \"d.csv\"\nlabel = 0");
        let cfg = RunConfig::from_toml(&text).unwrap();
        let DataConfig::Csv { label, .. } = &cfg.data else {
            panic!()
        };
        assert_eq!(LabelKey::column(label.as_ref()), LabelColumn::Index(0));
    }
}
