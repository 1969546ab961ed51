//! Gaussian process on the unit circle: loss `-<w, Z>` with
//! `Z ~ N(0, I_2)` and `w = (sin phi, cos phi)`.
//!
//! ERM picks the phase of the sample mean. Its per-sample information is
//! `log 2pi - E_r[h(f(. | r))]`, where `f(. | r)` is the phase law of
//! `N((r, 0)/n, (n-1)/n^2 I_2)` and `r = ||Z_i||` is Rayleigh with unit
//! scale.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use libm::erfc;

use crate::bounds::{sub_gaussian_ismi, MiProfile};
use crate::error::{domain, Error, Result};
use crate::quadrature::{differential_entropy, expectation_over_rayleigh, uniform_phase_entropy, Density1D, QuadConfig};
use crate::rng::{substream, McEstimate};

/// CMI bound of the ERM solution for a single sample.
pub const CMI_SINGLE_SAMPLE: f64 = 19.0352;

/// Quadrature settings for the phase entropy and the outer Rayleigh average.
pub fn gp_quadrature() -> QuadConfig {
    QuadConfig {
        tol: 1e-12,
        initial_panels: 32,
        max_doublings: 16,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GpParams {
    pub n: usize,
    /// Mass of the noise atom at 0; 1 means no noise.
    pub epsilon: f64,
}

impl GpParams {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        if n == 0 {
            return domain("n must be at least 1");
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return domain(format!("epsilon {epsilon} outside [0, 1]"));
        }
        Ok(GpParams { n, epsilon })
    }
}

/// Standard normal upper tail `Q(x) = P(X > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Wraps an angle into `[0, 2pi)`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Phase of the ERM hypothesis: `w = (sin phi, cos phi)` aligned with the
/// sample mean.
pub fn erm_phase(samples: &[[f64; 2]]) -> Result<f64> {
    let (mut a, mut b) = (0.0, 0.0);
    for s in samples {
        a += s[0];
        b += s[1];
    }
    if a == 0.0 && b == 0.0 {
        return Err(Error::DegenerateInput("sample mean is zero".into()));
    }
    Ok(wrap_phase(a.atan2(b)))
}

/// ERM phase shifted by noise that is 0 with probability `epsilon` and
/// uniform on `(-pi, pi)` otherwise. A zero sample mean yields phase 0.
pub fn noisy_erm_phase<R: Rng + ?Sized>(samples: &[[f64; 2]], epsilon: f64, rng: &mut R) -> f64 {
    let base = erm_phase(samples).unwrap_or(0.0);
    let keep: f64 = rng.random();
    let shift: f64 = rng.random();
    if keep < epsilon {
        base
    } else {
        wrap_phase(base + PI * (2.0 * shift - 1.0))
    }
}

pub fn exact_gen_erm(n: usize) -> f64 {
    (PI / (2.0 * n as f64)).sqrt()
}

pub fn exact_gen_noisy(n: usize, epsilon: f64) -> f64 {
    epsilon * exact_gen_erm(n)
}

/// `19.0352 / sqrt(n)`.
pub fn cmi_reference(n: usize) -> f64 {
    CMI_SINGLE_SAMPLE / (n as f64).sqrt()
}

/// Conditional phase density of the (noisy) ERM output given `||Z_i|| = r`,
/// with phase measured from the direction of `Z_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDensity {
    pub r: f64,
    pub n: usize,
    pub epsilon: f64,
}

impl PhaseDensity {
    pub fn eval(&self, phi: f64) -> f64 {
        let m = (self.n - 1) as f64;
        let (s, c) = phi.sin_cos();
        let r = self.r;
        let base = (-r * r / (2.0 * m)).exp() / TAU
            + r * c / (TAU * m).sqrt() * (-r * r * s * s / (2.0 * m)).exp() * q_function(-r * c / m.sqrt());
        (1.0 - self.epsilon) / TAU + self.epsilon * base
    }

    pub fn density(&self) -> Density1D {
        let me = *self;
        Density1D::new(move |phi| me.eval(phi), 0.0, TAU)
            .expect("[0, 2pi) is a valid support")
            .with_quad(gp_quadrature())
    }
}

pub fn phase_density(r: f64, n: usize) -> Result<PhaseDensity> {
    phase_density_noisy(r, n, 1.0)
}

pub fn phase_density_noisy(r: f64, n: usize, epsilon: f64) -> Result<PhaseDensity> {
    if n < 2 {
        return domain(format!("conditional phase density needs n >= 2, got {n}"));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return domain(format!("radius must be finite and nonnegative, got {r}"));
    }
    GpParams::new(n, epsilon)?;
    Ok(PhaseDensity { r, n, epsilon })
}

/// `I(W; Z_i)` in nats for the ERM output (`epsilon = 1`) or its noisy
/// variant.
///
/// `n = 1` has no conditional density: the output is a function of `Z_1`
/// (plus an atom of noise), so the information is `+inf` unless
/// `epsilon = 0`, where the output is independent of the data.
pub fn ismi_gp(n: usize, epsilon: f64) -> Result<f64> {
    GpParams::new(n, epsilon)?;
    if epsilon == 0.0 {
        return Ok(0.0);
    }
    if n == 1 {
        return Ok(f64::INFINITY);
    }
    let log_tau = uniform_phase_entropy();
    let failure = std::cell::RefCell::new(None);
    let info = expectation_over_rayleigh(
        |r| match phase_density_noisy(r, n, epsilon).and_then(|d| differential_entropy(&d.density())) {
            Ok(h) => log_tau - h,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        1.0,
        None,
        &gp_quadrature(),
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(info?.max(0.0))
}

/// `sqrt(2 I(W; Z_i))`; the loss is 1-sub-Gaussian.
pub fn ismi_bound_gp(n: usize, epsilon: f64) -> Result<f64> {
    let info = ismi_gp(n, epsilon)?;
    Ok(sub_gaussian_ismi(&MiProfile::uniform(n, info)?, 1.0)?.upper)
}

fn draw_samples<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<[f64; 2]> {
    (0..n)
        .map(|_| [StandardNormal.sample(rng), StandardNormal.sample(rng)])
        .collect()
}

/// Monte Carlo generalization error of the (noisy) ERM learner. The
/// population risk is exactly 0 because `W` is independent of a fresh
/// sample, so each trial contributes `<w, mean(S)>`.
pub fn monte_carlo_gen(params: GpParams, trials: usize, seed: u64) -> Result<McEstimate> {
    if trials < 100 {
        return domain(format!("need at least 100 trials, got {trials}"));
    }
    let gaps: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, t as u64);
            let samples = draw_samples(params.n, &mut rng);
            let phi = if params.epsilon == 1.0 {
                erm_phase(&samples).unwrap_or(0.0)
            } else {
                noisy_erm_phase(&samples, params.epsilon, &mut rng)
            };
            let (s, c) = phi.sin_cos();
            let (a, b) = samples
                .iter()
                .fold((0.0, 0.0), |(a, b), z| (a + z[0], b + z[1]));
            (s * a + c * b) / params.n as f64
        })
        .collect();
    Ok(McEstimate::from_samples(&gaps))
}

/// Draws the ERM phase given `Z_1 = (0, r)`, i.e. measured from the
/// direction of `Z_1`, with the other `n - 1` samples fresh.
pub fn sample_conditional_phase<R: Rng + ?Sized>(r: f64, n: usize, rng: &mut R) -> f64 {
    let mut samples = draw_samples(n, rng);
    samples[0] = [0.0, r];
    erm_phase(&samples).unwrap_or(0.0)
}

/// Draws `(phase of W, Z_1)` pairs for the sample-based cross-check of
/// [`ismi_gp`].
pub fn sample_phase_pairs(n: usize, count: usize, seed: u64) -> Vec<(f64, [f64; 2])> {
    (0..count)
        .map(|t| {
            let mut rng = substream(seed, t as u64);
            let samples = draw_samples(n, &mut rng);
            (erm_phase(&samples).unwrap_or(0.0), samples[0])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    #[test]
    fn q_function_reference_values() {
        // 30-digit references.
        let cases = [
            (-3.0, 0.99865010196836990547),
            (-1.0, 0.84134474606854294859),
            (0.0, 0.5),
            (0.5, 0.30853753872598689636),
            (std::f64::consts::FRAC_1_SQRT_2, 0.23975006109347671614),
            (1.0, 0.15865525393145705141),
            (2.5, 0.006209665325776135167),
            (5.0, 2.8665157187919391167e-7),
            (10.0, 7.619853024160526066e-24),
        ];
        for (x, q) in cases {
            assert!((q_function(x) / q - 1.0).abs() < 1e-14, "Q({x}) = {}", q_function(x));
        }
    }

    #[test]
    fn single_sample_phase_alignment() {
        assert_eq!(erm_phase(&[[0.0, 1.0]]).unwrap(), 0.0);
        let phi = erm_phase(&[[2.0, 0.5], [0.0, -0.5]]).unwrap();
        assert!((phi - PI / 2.0).abs() < 1e-15);
        assert!(matches!(erm_phase(&[[1.0, 1.0], [-1.0, -1.0]]), Err(Error::DegenerateInput(_))));
        let phi = erm_phase(&[[-1.0, 0.0]]).unwrap();
        assert!((phi - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn noise_extremes() {
        let mut rng = substream(1, 0);
        let samples = draw_samples(5, &mut rng);
        let erm = erm_phase(&samples).unwrap();
        for _ in 0..20 {
            assert_eq!(noisy_erm_phase(&samples, 1.0, &mut rng), erm);
        }
        // epsilon = 0: the output does not depend on the samples at all.
        let other = draw_samples(5, &mut rng);
        let a = noisy_erm_phase(&samples, 0.0, &mut substream(9, 9));
        let b = noisy_erm_phase(&other, 0.0, &mut substream(9, 9));
        let diff = wrap_phase(a - b);
        let expected = wrap_phase(erm - erm_phase(&other).unwrap());
        assert!((diff - expected).abs() < 1e-12, "shift is data-independent");
    }

    #[test]
    fn exact_gen_values() {
        assert!((exact_gen_erm(1) - 1.2533).abs() < 1e-4);
        assert!((exact_gen_erm(100) - 0.12533).abs() < 1e-5);
        assert!((exact_gen_noisy(100, 0.05) - 0.0062666).abs() < 1e-7);
    }

    #[test]
    fn cmi_values() {
        assert_eq!(cmi_reference(1), 19.0352);
        assert!((cmi_reference(100) - 1.90352).abs() < 1e-12);
        assert!((cmi_reference(4) - 9.5176).abs() < 1e-12);
    }

    #[test]
    fn density_at_zero_radius_is_uniform() {
        let d = phase_density(0.0, 7).unwrap();
        for phi in [0.0, 1.0, 3.0, 6.0] {
            assert!((d.eval(phi) - 1.0 / TAU).abs() < 1e-15);
        }
        let h = differential_entropy(&d.density()).unwrap();
        assert!((h - TAU.ln()).abs() < 1e-12);
    }

    #[test]
    fn density_at_quarter_turn() {
        for (r, n) in [(0.5, 2), (2.0, 5), (4.0, 50)] {
            let d = phase_density(r, n).unwrap();
            let expected = (-r * r / (2.0 * (n - 1) as f64)).exp() / TAU;
            assert!((d.eval(PI / 2.0) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn density_normalizes() {
        for n in [2, 3, 10, 100, 1024] {
            for r in [0.0, 0.3, 1.0, 2.5, 5.0, 8.0] {
                for eps in [1.0, 0.05] {
                    let d = phase_density_noisy(r, n, eps).unwrap();
                    let mass = integrate(|p| d.eval(p), 0.0, TAU, &gp_quadrature()).unwrap();
                    assert!((mass - 1.0).abs() < 1e-6, "n={n} r={r}: {mass}");
                    assert!((0..200).all(|j| d.eval(TAU * j as f64 / 200.0) >= 0.0));
                }
            }
        }
        assert!(phase_density(1.0, 1).is_err());
    }

    #[test]
    fn information_values() {
        assert_eq!(ismi_gp(50, 0.0).unwrap(), 0.0);
        assert_eq!(ismi_gp(1, 1.0).unwrap(), f64::INFINITY);
        let small = ismi_gp(10, 1.0).unwrap();
        let large = ismi_gp(10_000, 1.0).unwrap();
        assert!(large < small && large >= 0.0);
        for n in [2, 8, 64] {
            for eps in [0.0, 0.05, 0.5, 1.0] {
                assert!(ismi_gp(n, eps).unwrap() <= ismi_gp(n, 1.0).unwrap() + 1e-8);
            }
        }
    }

    #[test]
    fn bound_between_truth_and_cmi() {
        for n in [2, 4, 16, 256, 1024] {
            let b = ismi_bound_gp(n, 1.0).unwrap();
            assert!(b > exact_gen_erm(n), "n={n}: {b}");
            assert!(b < cmi_reference(n));
        }
    }

    #[test]
    fn monte_carlo_deterministic() {
        let p = GpParams::new(4, 1.0).unwrap();
        let a = monte_carlo_gen(p, 500, 1).unwrap();
        assert_eq!(a, monte_carlo_gen(p, 500, 1).unwrap());
        assert!(a.agrees_with(exact_gen_erm(4), 4.0));
    }
}
