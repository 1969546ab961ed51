//! Learning the mean of `N(mu, sigma^2 I_d)` under squared loss.
//!
//! The learner outputs the sample mean, so `I(S; W)` is infinite, yet each
//! `I(W; Z_i)` is finite and the per-sample bound stays informative.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::bounds::{full_mi_bound, ismi_bound, MiProfile};
use crate::cgf::{chi_squared_neg_cgf, sub_gaussian_cgf};
use crate::error::{domain, Result};
use crate::oracle::{gaussian_mi, GaussianJointSpec};
use crate::rng::{substream, McEstimate};

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MeanExampleParams {
    pub d: usize,
    pub sigma_sq: f64,
    pub n: usize,
    /// Only shifts the data; every output is invariant to it.
    pub mu: Vec<f64>,
}

impl MeanExampleParams {
    pub fn new(d: usize, sigma_sq: f64, n: usize) -> Result<Self> {
        Self::with_mean(d, sigma_sq, n, vec![0.0; d])
    }

    pub fn with_mean(d: usize, sigma_sq: f64, n: usize, mu: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return domain("dimension must be at least 1");
        }
        if !(sigma_sq > 0.0) || !sigma_sq.is_finite() {
            return domain(format!("variance must be positive, got {sigma_sq}"));
        }
        if n < 2 {
            return domain(format!("need n >= 2, got {n}"));
        }
        if mu.len() != d {
            return domain("mean vector length differs from d");
        }
        Ok(MeanExampleParams { d, sigma_sq, n, mu })
    }

    /// Scale of the chi-squared law of `l(W~, Z~)`: `(n + 1) sigma^2 / n`.
    pub fn sigma_l_sq(&self) -> f64 {
        (self.n as f64 + 1.0) * self.sigma_sq / self.n as f64
    }
}

/// `2 sigma^2 d / n`.
pub fn exact_gen(p: &MeanExampleParams) -> f64 {
    2.0 * p.sigma_sq * p.d as f64 / p.n as f64
}

/// `(d/2) log(n / (n - 1))`.
pub fn exact_per_sample_mi(p: &MeanExampleParams) -> Result<f64> {
    if p.n < 2 {
        return domain("per-sample information needs n >= 2");
    }
    let n = p.n as f64;
    Ok(0.5 * p.d as f64 * (n / (n - 1.0)).ln())
}

/// Same quantity through the covariance blocks of `(W, Z_i)`.
pub fn per_sample_mi_from_covariance(p: &MeanExampleParams) -> Result<f64> {
    gaussian_mi(&GaussianJointSpec::sample_mean_vs_sample(p.d, p.sigma_sq, p.n)?)
}

/// `sigma^2 d sqrt(2 (n+1)^2 / n^2 log(n / (n-1)))`.
pub fn ismi_bound_mean(p: &MeanExampleParams) -> f64 {
    let n = p.n as f64;
    p.sigma_sq * p.d as f64 * (2.0 * (n + 1.0).powi(2) / (n * n) * (n / (n - 1.0)).ln()).sqrt()
}

/// The bound obtained by feeding the exact per-sample information and the
/// chi-squared lower-tail CGF bound through the generic bound engine.
pub fn ismi_bound_mean_composed(p: &MeanExampleParams) -> Result<f64> {
    let profile = MiProfile::uniform(p.n, exact_per_sample_mi(p)?)?;
    let psi_minus = chi_squared_neg_cgf(p.d, p.sigma_l_sq())?;
    // Only the upper side is used: the sample mean is ERM, so gen >= 0 and
    // the `psi_+` side is irrelevant here.
    let psi_plus = sub_gaussian_cgf(1.0)?;
    Ok(ismi_bound(&profile, &psi_plus, &psi_minus)?.upper)
}

/// `I(S; W) = inf` for the deterministic sample mean, so this is `+inf`.
pub fn full_mi_bound_mean(p: &MeanExampleParams) -> Result<f64> {
    full_mi_bound(f64::INFINITY, p.n, 1.0)
}

/// Monte Carlo estimate of the generalization gap.
///
/// The population risk uses `E||W - Z~||^2 = sigma^2 d + ||W - mu||^2`.
/// Trial `t` draws from substream `(seed, t)`, so the result is the same
/// for any thread count.
pub fn monte_carlo_gen(p: &MeanExampleParams, trials: usize, seed: u64) -> Result<McEstimate> {
    if trials < 100 {
        return domain(format!("need at least 100 trials, got {trials}"));
    }
    let sigma = p.sigma_sq.sqrt();
    let gaps: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, t as u64);
            let mut samples = vec![0.0; p.n * p.d];
            for (j, z) in samples.iter_mut().enumerate() {
                let noise: f64 = StandardNormal.sample(&mut rng);
                *z = p.mu[j % p.d] + sigma * noise;
            }
            let mut w = vec![0.0; p.d];
            for row in samples.chunks_exact(p.d) {
                w.iter_mut().zip(row).for_each(|(a, b)| *a += b);
            }
            w.iter_mut().for_each(|a| *a /= p.n as f64);
            let population = p.sigma_sq * p.d as f64
                + w.iter().zip(&p.mu).map(|(a, m)| (a - m).powi(2)).sum::<f64>();
            let empirical = samples
                .chunks_exact(p.d)
                .map(|row| row.iter().zip(&w).map(|(z, a)| (a - z).powi(2)).sum::<f64>())
                .sum::<f64>()
                / p.n as f64;
            population - empirical
        })
        .collect();
    Ok(McEstimate::from_samples(&gaps))
}
