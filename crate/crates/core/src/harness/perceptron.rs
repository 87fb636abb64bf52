//! Online mistake-driven perceptron used as the downstream classifier.

use crate::error::{FiresError, Result};

use super::data::{Label, StreamBatch};

#[derive(Debug, Clone, PartialEq)]
pub struct Perceptron {
    pub w: Vec<f64>,
    pub b: f64,
    learning_rate: f64,
}

impl Perceptron {
    pub fn new(n_features: usize) -> Self {
        Perceptron {
            w: vec![0.0; n_features],
            b: 0.0,
            learning_rate: 1.0,
        }
    }

    pub fn with_learning_rate(n_features: usize, learning_rate: f64) -> Result<Self> {
        if !(learning_rate.is_finite() && learning_rate > 0.0) {
            return Err(FiresError::InvalidConfig(format!(
                "learning rate must be > 0, got {learning_rate}"
            )));
        }
        Ok(Perceptron {
            learning_rate,
            ..Perceptron::new(n_features)
        })
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        self.w.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        Label::from_score(self.score(x))
    }

    /// Fraction of rows classified correctly.
    pub fn accuracy(&self, batch: &StreamBatch) -> f64 {
        let hits = batch.rows().filter(|(x, y)| self.predict(x) == *y).count();
        hits as f64 / batch.len() as f64
    }

    /// One pass over the rows in order, updating on every mistake.
    /// Returns the number of updates.
    pub fn train(&mut self, batch: &StreamBatch) -> Result<usize> {
        if batch.n_features() != self.w.len() {
            return Err(FiresError::DimensionMismatch {
                what: "perceptron input",
                expected: self.w.len(),
                found: batch.n_features(),
            });
        }
        let mut mistakes = 0;
        for (x, y) in batch.rows() {
            let y = y.sign();
            if y * self.score(x) <= 0.0 {
                let step = self.learning_rate * y;
                for (w, v) in self.w.iter_mut().zip(x) {
                    *w += step * v;
                }
                self.b += step;
                mistakes += 1;
            }
        }
        if !(self.b.is_finite() && self.w.iter().all(|w| w.is_finite())) {
            return Err(FiresError::NonFinite("perceptron weights"));
        }
        Ok(mistakes)
    }
}
