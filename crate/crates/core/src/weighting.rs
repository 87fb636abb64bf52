//! Feature weights from per-feature importance and uncertainty.
//!
//! The weight of feature `j` is the closed-form maximiser of
//! `w (mu^2 - lambda_s sigma^2) - lambda_r w^2`, i.e.
//! `w_j = (mu_j^2 - lambda_s sigma_j^2) / (2 lambda_r)`.
//! Raw values are kept; selection only uses their ranking.

use crate::error::{FiresError, Result};
use crate::prob::GaussianParamSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightConfig {
    lambda_s: f64,
    lambda_r: f64,
}

impl WeightConfig {
    /// `lambda_s` scales the uncertainty penalty and must be `>= 0`;
    /// `lambda_r` scales the L2 regulariser and must be `> 0`.
    pub fn new(lambda_s: f64, lambda_r: f64) -> Result<Self> {
        if !(lambda_s.is_finite() && lambda_s >= 0.0) {
            return Err(FiresError::InvalidConfig(format!(
                "lambda_s must be finite and >= 0, got {lambda_s}"
            )));
        }
        if !(lambda_r.is_finite() && lambda_r > 0.0) {
            return Err(FiresError::InvalidConfig(format!(
                "lambda_r must be finite and > 0, got {lambda_r}"
            )));
        }
        Ok(WeightConfig { lambda_s, lambda_r })
    }

    pub fn lambda_s(&self) -> f64 {
        self.lambda_s
    }

    pub fn lambda_r(&self) -> f64 {
        self.lambda_r
    }
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig {
            lambda_s: 0.01,
            lambda_r: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureWeights {
    pub omega: Vec<f64>,
    pub timestep: u64,
}

impl FeatureWeights {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Feature indices ordered by descending weight; ties go to the lower index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.omega.len()).collect();
        idx.sort_by(|&a, &b| self.omega[b].total_cmp(&self.omega[a]).then(a.cmp(&b)));
        idx
    }
}

/// Weights for parameters that are already one (mu, sigma) pair per feature.
pub fn compute_weights(
    feature_params: &GaussianParamSet,
    cfg: &WeightConfig,
    timestep: u64,
) -> FeatureWeights {
    let scale = 1.0 / (2.0 * cfg.lambda_r);
    let omega = feature_params
        .mu()
        .iter()
        .zip(feature_params.sigma())
        .map(|(m, s)| scale * (m * m - cfg.lambda_s * s * s))
        .collect();
    FeatureWeights { omega, timestep }
}

/// Every feature with zero importance must carry a non-positive weight.
pub fn check_attentive(weights: &FeatureWeights, feature_params: &GaussianParamSet) -> bool {
    weights.len() == feature_params.len()
        && feature_params
            .mu()
            .iter()
            .zip(&weights.omega)
            .all(|(&m, &w)| m != 0.0 || w <= 0.0)
}

/// Checks both monotonicity biconditionals for features `i` and `j`:
/// with equal |mu|, `sigma_i >= sigma_j <=> w_i <= w_j`; with equal sigma,
/// `|mu_i| >= |mu_j| <=> w_i >= w_j`. A pair meeting neither premise passes.
pub fn check_monotonic(
    feature_params: &GaussianParamSet,
    weights: &FeatureWeights,
    i: usize,
    j: usize,
) -> bool {
    let (mu, sigma, w) = (feature_params.mu(), feature_params.sigma(), &weights.omega);
    let mut ok = true;
    if mu[i].abs() == mu[j].abs() {
        ok &= (sigma[i] >= sigma[j]) == (w[i] <= w[j]);
    }
    if sigma[i] == sigma[j] {
        ok &= (mu[i].abs() >= mu[j].abs()) == (w[i] >= w[j]);
    }
    ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::SIGMA_FLOOR;

    fn params(mu: &[f64], sigma: &[f64]) -> GaussianParamSet {
        GaussianParamSet::new(mu.to_vec(), sigma.to_vec()).unwrap()
    }

    #[test]
    fn zero_importance_weight() {
        let w = compute_weights(&params(&[0.0], &[1.0]), &WeightConfig::default(), 0);
        assert!((w.omega[0] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn floored_sigma_weight() {
        let cfg = WeightConfig::new(0.01, 0.5).unwrap();
        let w = compute_weights(&params(&[2.0], &[0.0]), &cfg, 0);
        let expected = 4.0 - 0.01 * SIGMA_FLOOR * SIGMA_FLOOR;
        assert!((w.omega[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn vector_weights() {
        let cfg = WeightConfig::new(1.0, 0.5).unwrap();
        let p = params(&[1.0, 1.0], &[2.0, 1.0]);
        let w = compute_weights(&p, &cfg, 3);
        // scalar re-computation
        for j in 0..2 {
            let (m, s) = (p.mu()[j], p.sigma()[j]);
            assert_eq!(w.omega[j], (m * m - 1.0 * s * s) / (2.0 * 0.5));
        }
        assert_eq!(w.omega, vec![-3.0, 0.0]);
        assert_eq!(w.timestep, 3);
    }

    #[test]
    fn invalid_config() {
        assert!(WeightConfig::new(0.01, 0.0).is_err());
        assert!(WeightConfig::new(-1.0, 0.1).is_err());
        assert!(WeightConfig::new(0.0, 0.1).is_ok());
    }

    #[test]
    fn attentive_cases() {
        let cfg = WeightConfig::default();
        let p = params(&[0.0], &[3.0]);
        assert!(check_attentive(&compute_weights(&p, &cfg, 0), &p));
        let p = params(&[0.0, 3.0], &[1.0, 1.0]);
        assert!(check_attentive(&compute_weights(&p, &cfg, 0), &p));
        let fake = FeatureWeights {
            omega: vec![0.1],
            timestep: 0,
        };
        assert!(!check_attentive(&fake, &params(&[0.0], &[1.0])));
    }

    #[test]
    fn monotonic_cases() {
        let cfg = WeightConfig::default();
        let p = params(&[1.0, -1.0], &[2.0, 1.0]);
        let w = compute_weights(&p, &cfg, 0);
        assert!(w.omega[0] < w.omega[1]);
        assert!(check_monotonic(&p, &w, 0, 1));

        let p = params(&[3.0, 1.0], &[1.0, 1.0]);
        let w = compute_weights(&p, &cfg, 0);
        assert!(w.omega[0] > w.omega[1]);
        assert!(check_monotonic(&p, &w, 0, 1));

        let p = params(&[-2.0, 2.0], &[1.0, 1.0]);
        let w = compute_weights(&p, &cfg, 0);
        assert_eq!(w.omega[0], w.omega[1]);
        assert!(check_monotonic(&p, &w, 0, 1));

        let bad = FeatureWeights {
            omega: vec![1.0, 0.0],
            timestep: 0,
        };
        assert!(!check_monotonic(
            &params(&[1.0, 1.0], &[2.0, 1.0]),
            &bad,
            0,
            1
        ));
    }

    #[test]
    fn ranking_ties_by_index() {
        let w = FeatureWeights {
            omega: vec![1.0, 3.0, 1.0, 2.0],
            timestep: 0,
        };
        assert_eq!(w.ranking(), vec![1, 3, 0, 2]);
    }
}
