//! Probit GLM base model.
//!
//! With `theta_j ~ N(mu_j, sigma_j)` and a probit link, the marginal
//! likelihood integrates in closed form:
//! `P(y | x) = Phi(y * sum_j mu_j x_j / rho)`, `rho = sqrt(1 + sum_j sigma_j^2 x_j^2)`.
//! Each feature owns exactly one parameter, so no aggregation is needed. The
//! bias term carries no feature information and is left out.

use crate::error::{FiresError, Result};
use crate::harness::data::{Label, StreamBatch};
use crate::prob::{cdf, pdf, GaussianParamSet};

use super::LIKELIHOOD_FLOOR;

pub fn glm_rho(x: &[f64], sigma: &[f64]) -> f64 {
    let s: f64 = x.iter().zip(sigma).map(|(x, s)| s * s * x * x).sum();
    (1.0 + s).sqrt()
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

fn check_row(x: &[f64], params: &GaussianParamSet) -> Result<()> {
    if x.len() != params.len() {
        return Err(FiresError::DimensionMismatch {
            what: "GLM feature row",
            expected: params.len(),
            found: x.len(),
        });
    }
    Ok(())
}

/// Closed-form marginal likelihood `P(y | x, psi)`.
pub fn glm_marginal(x: &[f64], y: Label, params: &GaussianParamSet) -> Result<f64> {
    check_row(x, params)?;
    let rho = glm_rho(x, params.sigma());
    Ok(cdf(y.sign() * dot(params.mu(), x) / rho))
}

/// Exact partial derivatives of [`glm_marginal`] with respect to mu and sigma.
pub fn glm_gradients(
    x: &[f64],
    y: Label,
    params: &GaussianParamSet,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_row(x, params)?;
    let mut d_mu = vec![0.0; x.len()];
    let mut d_sigma = vec![0.0; x.len()];
    accumulate_row(x, y, params, 1.0, false, &mut d_mu, &mut d_sigma);
    Ok((d_mu, d_sigma))
}

/// Adds `scale * grad` of either `P` or `log P` for one row.
fn accumulate_row(
    x: &[f64],
    y: Label,
    params: &GaussianParamSet,
    scale: f64,
    log_likelihood: bool,
    d_mu: &mut [f64],
    d_sigma: &mut [f64],
) {
    let sign = y.sign();
    let sigma = params.sigma();
    let rho = glm_rho(x, sigma);
    let inner = dot(params.mu(), x);
    let z = sign * inner / rho;
    let mut density = pdf(z);
    if log_likelihood {
        density /= cdf(z).max(LIKELIHOOD_FLOOR);
    }
    let g_mu = scale * density * sign / rho;
    let g_sigma = -scale * density * sign * inner / (rho * rho * rho);
    for j in 0..x.len() {
        let xj = x[j];
        if xj == 0.0 {
            continue;
        }
        d_mu[j] += g_mu * xj;
        d_sigma[j] += g_sigma * xj * xj * sigma[j];
    }
}

/// Probit base model: one Gaussian parameter per input feature.
#[derive(Debug, Clone, PartialEq)]
pub struct GlmModel {
    pub params: GaussianParamSet,
}

impl GlmModel {
    pub fn new(n_features: usize) -> Self {
        GlmModel {
            params: GaussianParamSet::standard(n_features),
        }
    }

    /// Batch mean of per-row `grad log P` with P floored before division.
    pub fn batch_log_likelihood_gradients(
        &self,
        batch: &StreamBatch,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        if batch.n_features() != self.params.len() {
            return Err(FiresError::DimensionMismatch {
                what: "batch features",
                expected: self.params.len(),
                found: batch.n_features(),
            });
        }
        let k = self.params.len();
        let mut d_mu = vec![0.0; k];
        let mut d_sigma = vec![0.0; k];
        let scale = 1.0 / batch.len() as f64;
        for (x, y) in batch.rows() {
            accumulate_row(x, y, &self.params, scale, true, &mut d_mu, &mut d_sigma);
        }
        Ok((d_mu, d_sigma))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::SIGMA_FLOOR;

    fn p(mu: &[f64], sigma: &[f64]) -> GaussianParamSet {
        GaussianParamSet::new(mu.to_vec(), sigma.to_vec()).unwrap()
    }

    #[test]
    fn rho_examples() {
        assert_eq!(glm_rho(&[0.0, 0.0], &[3.0, 4.0]), 1.0);
        assert_eq!(glm_rho(&[1.0], &[1.0]), 2f64.sqrt());
        let x = [1.0, 2.0];
        let s = [1.0, 0.5];
        let mut acc = 1.0;
        for j in 0..2 {
            acc += s[j] * s[j] * x[j] * x[j];
        }
        assert_eq!(glm_rho(&x, &s), acc.sqrt());
        assert!((glm_rho(&x, &s) - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn marginal_examples() {
        let params = p(&[0.7, -0.2], &[1.0, 2.0]);
        assert_eq!(
            glm_marginal(&[0.0, 0.0], Label::Positive, &params).unwrap(),
            0.5
        );
        let v = glm_marginal(&[1.0], Label::Positive, &p(&[1.0], &[0.0])).unwrap();
        assert!((v - 0.841_344_746_068_542_9).abs() < 1e-9);
        let x = [0.3, 0.9];
        let sum = glm_marginal(&x, Label::Positive, &params).unwrap()
            + glm_marginal(&x, Label::Negative, &params).unwrap();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradients_vanish_at_zero_input() {
        let (a, b) =
            glm_gradients(&[0.0, 0.0], Label::Negative, &p(&[1.0, 2.0], &[1.0, 1.0])).unwrap();
        assert!(a.iter().chain(&b).all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_at_zero_mean() {
        let (a, b) = glm_gradients(&[1.0], Label::Positive, &p(&[0.0], &[0.0])).unwrap();
        assert_eq!(b[0], 0.0);
        let rho = (1.0 + SIGMA_FLOOR * SIGMA_FLOOR).sqrt();
        assert!((a[0] - pdf(0.0) / rho).abs() < 1e-15);
        assert!((a[0] - 0.3989).abs() < 1e-4);
    }

    #[test]
    fn dimension_checked() {
        assert!(glm_marginal(&[1.0, 2.0], Label::Positive, &p(&[1.0], &[1.0])).is_err());
    }
}
