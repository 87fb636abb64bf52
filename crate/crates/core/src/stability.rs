//! Feature-selection stability over a shifting window of selection masks.
//!
//! For `r` masks over `J` features with `M` selected in each, let `p_j` be the
//! fraction of masks selecting feature `j` and `s_j^2 = r/(r-1) p_j (1 - p_j)`
//! its unbiased sample variance. Stability is
//! `1 - mean_j(s_j^2) / ((M/J)(1 - M/J))`: exactly 1 for identical masks and
//! about 0 for masks drawn at random.

use std::collections::VecDeque;

use crate::engine::SelectionMask;
use crate::error::{FiresError, Result};

/// Stability from per-feature selection counts over `r` masks.
///
/// `None` when `r < 2` or the selection is degenerate (`M = 0` or `M = J`).
pub fn stability_from_counts(counts: &[usize], r: usize, n_selected: usize) -> Option<f64> {
    let j = counts.len();
    if r < 2 || n_selected == 0 || n_selected >= j {
        return None;
    }
    let rf = r as f64;
    let unbias = rf / (rf - 1.0);
    let total: f64 = counts
        .iter()
        .map(|&c| {
            let p = c as f64 / rf;
            unbias * p * (1.0 - p)
        })
        .sum();
    let k = n_selected as f64 / j as f64;
    Some(1.0 - (total / j as f64) / (k * (1.0 - k)))
}

/// Stability of an explicit list of indicator vectors.
///
/// Masks must share one width and one cardinality.
pub fn stability_of(masks: &[Vec<bool>]) -> Result<Option<f64>> {
    let Some(first) = masks.first() else {
        return Ok(None);
    };
    let j = first.len();
    let m = first.iter().filter(|&&b| b).count();
    let mut counts = vec![0usize; j];
    for mask in masks {
        check_mask(mask.len(), mask.iter().filter(|&&b| b).count(), j, m)?;
        for (c, &b) in counts.iter_mut().zip(mask) {
            *c += b as usize;
        }
    }
    Ok(stability_from_counts(&counts, masks.len(), m))
}

fn check_mask(width: usize, cardinality: usize, j: usize, m: usize) -> Result<()> {
    if width != j {
        return Err(FiresError::DimensionMismatch {
            what: "selection mask width",
            expected: j,
            found: width,
        });
    }
    if cardinality != m {
        return Err(FiresError::DimensionMismatch {
            what: "selection mask cardinality",
            expected: m,
            found: cardinality,
        });
    }
    Ok(())
}

/// Ring buffer of the `r` most recent masks with running selection counts.
#[derive(Debug, Clone)]
pub struct StabilityWindow {
    capacity: usize,
    n_features: usize,
    n_selected: usize,
    masks: VecDeque<Vec<usize>>,
    counts: Vec<usize>,
}

impl StabilityWindow {
    pub fn new(capacity: usize, n_features: usize, n_selected: usize) -> Result<Self> {
        if capacity < 2 {
            return Err(FiresError::InvalidConfig(format!(
                "stability window needs at least 2 slots, got {capacity}"
            )));
        }
        if n_selected > n_features {
            return Err(FiresError::SelectionOutOfRange {
                m: n_selected,
                n_features,
            });
        }
        Ok(StabilityWindow {
            capacity,
            n_features,
            n_selected,
            masks: VecDeque::with_capacity(capacity),
            counts: vec![0; n_features],
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    /// Adds a mask, evicting the oldest once the window is full.
    pub fn push(&mut self, mask: &SelectionMask) -> Result<()> {
        check_mask(
            mask.n_features(),
            mask.len(),
            self.n_features,
            self.n_selected,
        )?;
        if self.masks.len() == self.capacity {
            if let Some(old) = self.masks.pop_front() {
                for j in old {
                    self.counts[j] -= 1;
                }
            }
        }
        for &j in mask.selected() {
            self.counts[j] += 1;
        }
        self.masks.push_back(mask.selected().to_vec());
        Ok(())
    }

    /// Stability of the masks currently held. During warm-up the partial
    /// window is used with its actual size.
    pub fn stability(&self) -> Option<f64> {
        stability_from_counts(&self.counts, self.masks.len(), self.n_selected)
    }
}
