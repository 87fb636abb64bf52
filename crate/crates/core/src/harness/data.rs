//! In-memory streams: labels, batches and whole datasets.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{FiresError, Result};

/// Binary class label, encoded as -1 / +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    pub fn from_score(score: f64) -> Label {
        if score > 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

impl TryFrom<f64> for Label {
    type Error = FiresError;

    fn try_from(v: f64) -> Result<Label> {
        if v == 1.0 {
            Ok(Label::Positive)
        } else if v == -1.0 {
            Ok(Label::Negative)
        } else {
            Err(FiresError::InvalidLabel(v))
        }
    }
}

/// `B` observations of `J` features, row-major, observed at time step `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamBatch {
    x: Vec<f64>,
    y: Vec<Label>,
    n_features: usize,
    pub t: u64,
}

impl StreamBatch {
    pub fn new(x: Vec<f64>, y: Vec<Label>, n_features: usize, t: u64) -> Result<Self> {
        if y.is_empty() {
            return Err(FiresError::EmptyBatch);
        }
        if x.len() != y.len() * n_features {
            return Err(FiresError::DimensionMismatch {
                what: "batch matrix",
                expected: y.len() * n_features,
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(FiresError::NonFinite("batch features"));
        }
        Ok(StreamBatch {
            x,
            y,
            n_features,
            t,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    #[inline]
    pub fn row(&self, b: usize) -> &[f64] {
        &self.x[b * self.n_features..(b + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], Label)> + '_ {
        self.x
            .chunks_exact(self.n_features.max(1))
            .zip(self.y.iter().copied())
    }

    pub fn labels(&self) -> &[Label] {
        &self.y
    }

    pub fn features(&self) -> &[f64] {
        &self.x
    }

    /// Copy of the batch with every column outside `keep` set to zero.
    pub fn masked(&self, keep: &[bool]) -> StreamBatch {
        assert_eq!(keep.len(), self.n_features, "mask width");
        let mut x = self.x.clone();
        for row in x.chunks_exact_mut(self.n_features) {
            for (v, &k) in row.iter_mut().zip(keep) {
                if !k {
                    *v = 0.0;
                }
            }
        }
        StreamBatch {
            x,
            y: self.y.clone(),
            n_features: self.n_features,
            t: self.t,
        }
    }
}

/// A fully materialised stream, replayed in row order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<Label>,
    n_features: usize,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(x: Vec<f64>, y: Vec<Label>, n_features: usize) -> Result<Self> {
        if n_features == 0 {
            return Err(FiresError::Data("dataset has no feature columns".into()));
        }
        if x.len() != y.len() * n_features {
            return Err(FiresError::DimensionMismatch {
                what: "dataset matrix",
                expected: y.len() * n_features,
                found: x.len(),
            });
        }
        let feature_names = (0..n_features).map(|j| format!("x{j}")).collect();
        Ok(Dataset {
            x,
            y,
            n_features,
            feature_names,
        })
    }

    pub fn from_rows<I>(rows: I, n_features: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<f64>, Label)>,
    {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (row, label) in rows {
            if row.len() != n_features {
                return Err(FiresError::DimensionMismatch {
                    what: "dataset row",
                    expected: n_features,
                    found: row.len(),
                });
            }
            x.extend_from_slice(&row);
            y.push(label);
        }
        Dataset::new(x, y, n_features)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn labels(&self) -> &[Label] {
        &self.y
    }

    /// True when both classes occur.
    pub fn has_both_classes(&self) -> bool {
        self.y.contains(&Label::Positive) && self.y.contains(&Label::Negative)
    }

    /// Consecutive batches of `batch_size` rows in file order; the last batch
    /// may be shorter. Time steps count from 1.
    pub fn batches(&self, batch_size: usize) -> impl Iterator<Item = StreamBatch> + '_ {
        assert!(batch_size > 0, "batch size must be positive");
        let j = self.n_features;
        self.y
            .chunks(batch_size)
            .zip(self.x.chunks(batch_size * j))
            .enumerate()
            .map(move |(i, (y, x))| StreamBatch {
                x: x.to_vec(),
                y: y.to_vec(),
                n_features: j,
                t: i as u64 + 1,
            })
    }

    pub fn n_batches(&self, batch_size: usize) -> usize {
        self.len().div_ceil(batch_size)
    }

    /// Rows permuted by a seeded shuffle. Useful for files stored sorted by
    /// class, which otherwise stream as long single-class runs.
    pub fn shuffled(&self, seed: u64) -> Dataset {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let j = self.n_features;
        let mut x = Vec::with_capacity(self.x.len());
        for &i in &order {
            x.extend_from_slice(self.row(i));
        }
        Dataset {
            x,
            y: order.iter().map(|&i| self.y[i]).collect(),
            n_features: j,
            feature_names: self.feature_names.clone(),
        }
    }
}
