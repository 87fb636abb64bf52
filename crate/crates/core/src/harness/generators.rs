//! Seeded synthetic streams: Gaussian clusters around random centroids, and
//! labels from a randomly grown decision tree.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{FiresError, Result};

use super::data::{Dataset, Label};

#[derive(Debug, Clone)]
struct Centroid {
    center: Vec<f64>,
    label: Label,
    spread: f64,
}

/// Random radial-basis stream. Each sample picks a centroid uniformly and adds
/// a Gaussian offset along a random direction, clipped to the unit cube.
#[derive(Debug, Clone)]
pub struct RbfGenerator {
    centroids: Vec<Centroid>,
    n_features: usize,
    rng: ChaCha8Rng,
}

impl RbfGenerator {
    pub fn new(seed: u64, n_features: usize, n_centroids: usize) -> Result<Self> {
        if n_features == 0 || n_centroids == 0 {
            return Err(FiresError::InvalidConfig(
                "rbf stream needs at least one feature and one centroid".into(),
            ));
        }
        let mut model_rng = ChaCha8Rng::seed_from_u64(seed);
        // Alternating classes over a shuffled order keeps both classes
        // equiprobable whenever there are two or more centroids.
        let mut order: Vec<usize> = (0..n_centroids).collect();
        order.shuffle(&mut model_rng);
        let mut centroids = vec![];
        for &slot in &order {
            let center = (0..n_features).map(|_| model_rng.random::<f64>()).collect();
            let label = if slot % 2 == 0 {
                Label::Positive
            } else {
                Label::Negative
            };
            centroids.push(Centroid {
                center,
                label,
                spread: model_rng.random::<f64>(),
            });
        }
        let sample_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
        Ok(RbfGenerator {
            centroids,
            n_features,
            rng: sample_rng,
        })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn next_sample(&mut self) -> (Vec<f64>, Label) {
        let c = &self.centroids[self.rng.random_range(0..self.centroids.len())];
        let dir: Vec<f64> = (0..self.n_features)
            .map(|_| self.rng.sample(StandardNormal))
            .collect();
        let norm = dir
            .iter()
            .map(|d| d * d)
            .sum::<f64>()
            .sqrt()
            .max(f64::MIN_POSITIVE);
        let radius = self.rng.sample::<f64, _>(StandardNormal) * c.spread;
        let x = c
            .center
            .iter()
            .zip(&dir)
            .map(|(m, d)| (m + radius * d / norm).clamp(0.0, 1.0))
            .collect();
        (x, c.label)
    }

    pub fn take_dataset(&mut self, n_samples: usize) -> Result<Dataset> {
        let rows: Vec<_> = (0..n_samples).map(|_| self.next_sample()).collect();
        Dataset::from_rows(rows, self.n_features)
    }
}

pub fn gen_rbf_stream(
    seed: u64,
    n_samples: usize,
    n_features: usize,
    n_centroids: usize,
) -> Result<Dataset> {
    RbfGenerator::new(seed, n_features, n_centroids)?.take_dataset(n_samples)
}

/// Shape of a random-tree stream.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeStreamConfig {
    pub seed: u64,
    pub n_num_features: usize,
    pub n_cat_features: usize,
    pub n_cat_values: usize,
    /// Numeric features the tree may split on; they come first in the layout.
    pub n_relevant: usize,
    /// Depth of the label tree, capped by `n_relevant`.
    pub max_depth: usize,
    /// Probability of flipping a label after the tree assigns it.
    pub label_noise: f64,
}

impl TreeStreamConfig {
    pub fn new(
        seed: u64,
        n_num_features: usize,
        n_cat_features: usize,
        n_cat_values: usize,
    ) -> Self {
        TreeStreamConfig {
            seed,
            n_num_features,
            n_cat_features,
            n_cat_values,
            n_relevant: n_num_features.min(5),
            max_depth: 5,
            label_noise: 0.0,
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_num_features + self.n_cat_features * self.n_cat_values
    }
}

#[derive(Debug, Clone)]
enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf(Label),
}

impl Node {
    fn classify(&self, x: &[f64]) -> Label {
        match self {
            Node::Leaf(l) => *l,
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] <= *threshold {
                    left.classify(x)
                } else {
                    right.classify(x)
                }
            }
        }
    }
}

/// Labels come from a random tree over the first `n_relevant` numeric
/// features. Along each root-to-leaf path every split uses a different
/// feature. Each feature carries a fixed orientation and a leaf votes with the
/// sum of its path's oriented directions, so the label is monotone in each
/// relevant feature. Categorical features are one-hot noise.
#[derive(Debug, Clone)]
pub struct TreeGenerator {
    cfg: TreeStreamConfig,
    root: Node,
    rng: ChaCha8Rng,
}

impl TreeGenerator {
    pub fn new(cfg: TreeStreamConfig) -> Result<Self> {
        if cfg.n_features() == 0 {
            return Err(FiresError::InvalidConfig(
                "tree stream needs at least one feature".into(),
            ));
        }
        if cfg.n_cat_features > 0 && cfg.n_cat_values == 0 {
            return Err(FiresError::InvalidConfig(
                "categorical features need at least one value".into(),
            ));
        }
        if cfg.n_relevant == 0 || cfg.n_relevant > cfg.n_num_features {
            return Err(FiresError::InvalidConfig(format!(
                "n_relevant must be in 1..={}, got {}",
                cfg.n_num_features, cfg.n_relevant
            )));
        }
        if !(0.0..=1.0).contains(&cfg.label_noise) {
            return Err(FiresError::InvalidConfig(
                "label_noise must lie in [0, 1]".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let orientation: Vec<f64> = (0..cfg.n_relevant)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let depth = cfg.max_depth.clamp(1, cfg.n_relevant);
        let pool: Vec<usize> = (0..cfg.n_relevant).collect();
        let root = grow(&mut rng, &pool, depth, &orientation, 0.0);
        let sample_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xD1B5_4A32_D192_ED03);
        Ok(TreeGenerator {
            cfg,
            root,
            rng: sample_rng,
        })
    }

    pub fn n_features(&self) -> usize {
        self.cfg.n_features()
    }

    pub fn relevant_features(&self) -> Vec<usize> {
        (0..self.cfg.n_relevant).collect()
    }

    /// Noise-free label of `x` under the tree.
    pub fn classify(&self, x: &[f64]) -> Label {
        self.root.classify(x)
    }

    pub fn next_sample(&mut self) -> (Vec<f64>, Label) {
        let mut x = Vec::with_capacity(self.n_features());
        for _ in 0..self.cfg.n_num_features {
            x.push(self.rng.random::<f64>());
        }
        for _ in 0..self.cfg.n_cat_features {
            let hot = self.rng.random_range(0..self.cfg.n_cat_values);
            x.extend((0..self.cfg.n_cat_values).map(|v| if v == hot { 1.0 } else { 0.0 }));
        }
        let mut y = self.classify(&x);
        if self.cfg.label_noise > 0.0 && self.rng.random::<f64>() < self.cfg.label_noise {
            y = match y {
                Label::Positive => Label::Negative,
                Label::Negative => Label::Positive,
            };
        }
        (x, y)
    }

    pub fn take_dataset(&mut self, n_samples: usize) -> Result<Dataset> {
        let rows: Vec<_> = (0..n_samples).map(|_| self.next_sample()).collect();
        Dataset::from_rows(rows, self.n_features())
    }
}

fn grow(
    rng: &mut ChaCha8Rng,
    pool: &[usize],
    depth: usize,
    orientation: &[f64],
    vote: f64,
) -> Node {
    if depth == 0 || pool.is_empty() {
        let label = if vote > 0.0 {
            Label::Positive
        } else if vote < 0.0 {
            Label::Negative
        } else if rng.random::<bool>() {
            Label::Positive
        } else {
            Label::Negative
        };
        return Node::Leaf(label);
    }
    let pick = rng.random_range(0..pool.len());
    let feature = pool[pick];
    let rest: Vec<usize> = pool.iter().copied().filter(|&f| f != feature).collect();
    let threshold = rng.random_range(0.25..0.75);
    let s = orientation[feature];
    let left = grow(rng, &rest, depth - 1, orientation, vote - s);
    let right = grow(rng, &rest, depth - 1, orientation, vote + s);
    Node::Split {
        feature,
        threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

pub fn gen_tree_stream(
    seed: u64,
    n_samples: usize,
    n_num_features: usize,
    n_cat_features: usize,
    n_cat_values: usize,
) -> Result<Dataset> {
    TreeGenerator::new(TreeStreamConfig::new(
        seed,
        n_num_features,
        n_cat_features,
        n_cat_values,
    ))?
    .take_dataset(n_samples)
}
