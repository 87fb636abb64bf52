//! Standard-normal primitives and the Gaussian parameter store.
//!
//! Every model parameter is treated as an independent Gaussian
//! `theta_k ~ N(mu_k, sigma_k)`. The mean carries the parameter's importance
//! for the prediction and the standard deviation its uncertainty.

use crate::error::{FiresError, Result};

/// Smallest standard deviation a [`GaussianParamSet`] will hold.
///
/// Gradient ascent on sigma can push it through zero; values are clipped here
/// after every update.
pub const SIGMA_FLOOR: f64 = 1e-6;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard-normal density. Unchecked; callers guarantee a finite argument.
#[inline]
pub fn pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard-normal CDF via `erfc`, accurate in both tails.
#[inline]
pub fn cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * std::f64::consts::FRAC_1_SQRT_2)
}

/// Checked standard-normal density.
pub fn std_normal_pdf(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(FiresError::NonFinite("std_normal_pdf argument"));
    }
    Ok(pdf(z))
}

/// Checked standard-normal CDF.
pub fn std_normal_cdf(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(FiresError::NonFinite("std_normal_cdf argument"));
    }
    Ok(cdf(z))
}

/// Logistic sigmoid, stable for large |z|.
#[inline]
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Means and standard deviations of `K` independent Gaussian parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianParamSet {
    mu: Vec<f64>,
    sigma: Vec<f64>,
}

impl GaussianParamSet {
    /// Builds a parameter set. Standard deviations below [`SIGMA_FLOOR`]
    /// (including zero or negative requests) are raised to the floor.
    pub fn new(mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(FiresError::DimensionMismatch {
                what: "parameter set (must be non-empty)",
                expected: 1,
                found: 0,
            });
        }
        if mu.len() != sigma.len() {
            return Err(FiresError::DimensionMismatch {
                what: "parameter set sigma",
                expected: mu.len(),
                found: sigma.len(),
            });
        }
        if mu.iter().chain(&sigma).any(|v| !v.is_finite()) {
            return Err(FiresError::NonFinite("parameter set"));
        }
        let sigma = sigma.into_iter().map(|s| s.max(SIGMA_FLOOR)).collect();
        Ok(GaussianParamSet { mu, sigma })
    }

    /// `k` standard-normal parameters: `mu = 0`, `sigma = 1`.
    pub fn standard(k: usize) -> Self {
        assert!(k > 0, "parameter set must be non-empty");
        GaussianParamSet {
            mu: vec![0.0; k],
            sigma: vec![1.0; k],
        }
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// One gradient-ascent step: `mu += alpha_mu * grad_mu`,
    /// `sigma += alpha_sigma * grad_sigma`, then sigma is floored.
    ///
    /// The set is left untouched if the step would produce a non-finite value.
    pub fn ascend(
        &mut self,
        grad_mu: &[f64],
        grad_sigma: &[f64],
        alpha_mu: f64,
        alpha_sigma: f64,
    ) -> Result<()> {
        let k = self.len();
        for (what, g) in [("mu gradient", grad_mu), ("sigma gradient", grad_sigma)] {
            if g.len() != k {
                return Err(FiresError::DimensionMismatch {
                    what,
                    expected: k,
                    found: g.len(),
                });
            }
        }
        let finite = self
            .mu
            .iter()
            .zip(grad_mu)
            .all(|(m, g)| (m + alpha_mu * g).is_finite())
            && self
                .sigma
                .iter()
                .zip(grad_sigma)
                .all(|(s, g)| (s + alpha_sigma * g).is_finite());
        if !finite {
            return Err(FiresError::NonFinite("parameter update"));
        }
        for (m, g) in self.mu.iter_mut().zip(grad_mu) {
            *m += alpha_mu * g;
        }
        for (s, g) in self.sigma.iter_mut().zip(grad_sigma) {
            *s = (*s + alpha_sigma * g).max(SIGMA_FLOOR);
        }
        Ok(())
    }
}

/// `E[Phi(sum_i alpha_i X_i + beta)]` for independent `X_i ~ N(mu_i, sigma_i)`,
/// in closed form: `Phi((beta + sum alpha_i mu_i) / sqrt(1 + sum alpha_i^2 sigma_i^2))`.
pub fn gaussian_cdf_expectation(
    alpha: &[f64],
    beta: f64,
    params: &GaussianParamSet,
) -> Result<f64> {
    if alpha.len() != params.len() {
        return Err(FiresError::DimensionMismatch {
            what: "gaussian_cdf_expectation coefficients",
            expected: params.len(),
            found: alpha.len(),
        });
    }
    if !beta.is_finite() || alpha.iter().any(|a| !a.is_finite()) {
        return Err(FiresError::NonFinite(
            "gaussian_cdf_expectation coefficients",
        ));
    }
    let mut num = beta;
    let mut var = 1.0;
    for ((a, m), s) in alpha.iter().zip(params.mu()).zip(params.sigma()) {
        num += a * m;
        var += a * a * s * s;
    }
    Ok(cdf(num / var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pdf_values() {
        assert!((std_normal_pdf(0.0).unwrap() - 0.398_942_280_4).abs() < 1e-10);
        assert!(std_normal_pdf(10.0).unwrap() < 1e-21);
        assert_eq!(std_normal_pdf(-1.7).unwrap(), std_normal_pdf(1.7).unwrap());
    }

    #[test]
    fn cdf_values() {
        assert_eq!(std_normal_cdf(0.0).unwrap(), 0.5);
        // erf-based reference value of Phi(1)
        assert!((std_normal_cdf(1.0).unwrap() - 0.841_344_746_068_542_9).abs() < 1e-15);
        let lo = std_normal_cdf(-1.0).unwrap();
        assert!((lo - (1.0 - std_normal_cdf(1.0).unwrap())).abs() < 1e-15);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(std_normal_pdf(f64::NAN).is_err());
        assert!(std_normal_cdf(f64::INFINITY).is_err());
        assert!(GaussianParamSet::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn cdf_tails_do_not_cancel() {
        // Phi(-10) ~ 7.6e-24: a 1 - Phi(10) formulation would return 0.
        let v = cdf(-10.0);
        assert!(v > 7.0e-24 && v < 8.0e-24, "{v}");
    }

    #[test]
    fn expectation_reduces_to_phi_for_zero_alpha() {
        let p = GaussianParamSet::new(vec![0.3, -2.0], vec![1.0, 4.0]).unwrap();
        let v = gaussian_cdf_expectation(&[0.0, 0.0], 0.7, &p).unwrap();
        assert_eq!(v, cdf(0.7));
    }

    #[test]
    fn expectation_centered() {
        let p = GaussianParamSet::new(vec![0.0], vec![0.0]).unwrap();
        let v = gaussian_cdf_expectation(&[1.0], 0.0, &p).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn expectation_one_dim_value() {
        let p = GaussianParamSet::new(vec![1.0], vec![1.0]).unwrap();
        let v = gaussian_cdf_expectation(&[1.0], 0.0, &p).unwrap();
        assert!((v - cdf(std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-15);
        assert!((v - 0.7602).abs() < 1e-4);
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let p = GaussianParamSet::standard(3);
        assert!(gaussian_cdf_expectation(&[1.0], 0.0, &p).is_err());
    }

    #[test]
    fn sigma_floor_enforced() {
        let mut p = GaussianParamSet::new(vec![0.0, 0.0], vec![-1.0, 0.5]).unwrap();
        assert_eq!(p.sigma()[0], SIGMA_FLOOR);
        p.ascend(&[1.0, 1.0], &[-100.0, 1.0], 0.1, 0.1).unwrap();
        assert_eq!(p.sigma()[0], SIGMA_FLOOR);
        assert!((p.sigma()[1] - 0.6).abs() < 1e-15);
        assert!((p.mu()[0] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn ascend_rejects_non_finite_without_mutating() {
        let mut p = GaussianParamSet::standard(2);
        let before = p.clone();
        assert!(p
            .ascend(&[f64::INFINITY, 0.0], &[0.0, 0.0], 1.0, 1.0)
            .is_err());
        assert_eq!(p, before);
    }
}
