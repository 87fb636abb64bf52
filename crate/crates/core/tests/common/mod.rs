#![allow(dead_code)]

use fires_core::harness::{Dataset, Label};
use fires_core::prob::GaussianParamSet;
use rand::Rng;

/// Stability of a window computed column by column from the definition:
/// unbiased sample variance of each selection indicator, averaged, over the
/// variance of a random selection of the same size.
pub fn brute_force_stability(masks: &[Vec<bool>]) -> Option<f64> {
    let r = masks.len();
    if r < 2 {
        return None;
    }
    let j = masks[0].len();
    let m = masks[0].iter().filter(|&&b| b).count();
    if m == 0 || m == j {
        return None;
    }
    let mut total = 0.0;
    for col in 0..j {
        let z: Vec<f64> = masks
            .iter()
            .map(|a| if a[col] { 1.0 } else { 0.0 })
            .collect();
        let mean = z.iter().sum::<f64>() / r as f64;
        let ss: f64 = z.iter().map(|v| (v - mean) * (v - mean)).sum();
        total += ss / (r - 1) as f64;
    }
    let k = m as f64 / j as f64;
    Some(1.0 - (total / j as f64) / (k * (1.0 - k)))
}

pub fn random_mask<R: Rng>(rng: &mut R, j: usize, m: usize) -> Vec<bool> {
    let picked = rand::seq::index::sample(rng, j, m);
    let mut mask = vec![false; j];
    for i in picked.iter() {
        mask[i] = true;
    }
    mask
}

/// Infinity-norm error of `analytic` relative to the size of `numeric`.
pub fn max_rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let scale = numeric.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-8);
    analytic
        .iter()
        .zip(numeric)
        .fold(0.0f64, |m, (a, n)| m.max((a - n).abs()))
        / scale
}

pub fn random_params<R: Rng>(
    rng: &mut R,
    k: usize,
    mu_scale: f64,
    sigma_range: (f64, f64),
) -> GaussianParamSet {
    let mu = (0..k)
        .map(|_| rng.random_range(-mu_scale..mu_scale))
        .collect();
    let sigma = (0..k)
        .map(|_| rng.random_range(sigma_range.0..sigma_range.1))
        .collect();
    GaussianParamSet::new(mu, sigma).unwrap()
}

pub fn random_label<R: Rng>(rng: &mut R) -> Label {
    if rng.random::<bool>() {
        Label::Positive
    } else {
        Label::Negative
    }
}

/// `y = sign(x_0 - 0.5)` with `n_noise` uniform noise columns after it.
pub fn threshold_stream(seed: u64, n_rows: usize, n_noise: usize) -> Dataset {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let j = n_noise + 1;
    let rows = (0..n_rows).map(|_| {
        let x: Vec<f64> = (0..j).map(|_| rng.random::<f64>()).collect();
        let y = Label::from_score(x[0] - 0.5);
        (x, y)
    });
    Dataset::from_rows(rows, j).unwrap()
}

/// Like [`threshold_stream`], but noise feature `k` is uniform on `[0, k / n_noise]`
/// so that no two features are exchangeable.
pub fn graded_noise_stream(seed: u64, n_rows: usize, n_noise: usize) -> Dataset {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let j = n_noise + 1;
    let rows = (0..n_rows).map(|_| {
        let x: Vec<f64> = (0..j)
            .map(|k| {
                if k == 0 {
                    rng.random::<f64>()
                } else {
                    rng.random::<f64>() * k as f64 / n_noise as f64
                }
            })
            .collect();
        let y = Label::from_score(x[0] - 0.5);
        (x, y)
    });
    Dataset::from_rows(rows, j).unwrap()
}

/// Standardised gaps `|closed form - sample mean| / standard error` for
/// `n_configs` random draws of `(alpha, beta, mu, sigma)` with up to
/// `max_dim` dimensions.
pub fn expectation_z_scores(
    seed: u64,
    n_configs: usize,
    n_samples: usize,
    max_dim: usize,
) -> Vec<f64> {
    use fires_core::prob::{cdf, gaussian_cdf_expectation};
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n_configs)
        .map(|_| {
            let n = rng.random_range(1..=max_dim);
            let alpha: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
            let beta = rng.random_range(-1.0..1.0);
            let params = random_params(&mut rng, n, 1.0, (0.1, 1.5));
            let closed = gaussian_cdf_expectation(&alpha, beta, &params).unwrap();
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..n_samples {
                let mut z = beta;
                for ((a, m), s) in alpha.iter().zip(params.mu()).zip(params.sigma()) {
                    let r: f64 = StandardNormal.sample(&mut rng);
                    z += a * (m + s * r);
                }
                let v = cdf(z);
                sum += v;
                sum_sq += v * v;
            }
            let m = n_samples as f64;
            let mean = sum / m;
            let var = (sum_sq / m - mean * mean).max(0.0) * m / (m - 1.0);
            let se = (var / m).sqrt().max(1e-12);
            (closed - mean).abs() / se
        })
        .collect()
}
