//! Composite Simpson quadrature with panel doubling, and the entropy and
//! Rayleigh-expectation integrals built on it.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};

/// Densities below this are treated as zero inside `p log p`.
const DENSITY_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct QuadConfig {
    /// Stop once two successive estimates differ by less than this.
    pub tol: f64,
    /// Panels in the first pass. Must be even.
    pub initial_panels: usize,
    pub max_doublings: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            tol: 1e-7,
            initial_panels: 16,
            max_doublings: 20,
        }
    }
}

impl QuadConfig {
    pub fn with_tol(tol: f64) -> Self {
        QuadConfig {
            tol,
            ..Self::default()
        }
    }
}

/// `int_a^b f` by composite Simpson, doubling the panel count until two
/// successive estimates agree to `cfg.tol`. Function values are reused
/// across doublings.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return domain(format!("invalid interval [{a}, {b}]"));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut panels = cfg.initial_panels.max(2);
    panels += panels % 2;
    let mut h = (b - a) / panels as f64;

    // Endpoint, odd-node and even-node sums of the current grid.
    let ends = f(a) + f(b);
    let mut odd: f64 = (0..panels / 2).map(|j| f(a + (2 * j + 1) as f64 * h)).sum();
    let mut even: f64 = (1..panels / 2).map(|j| f(a + (2 * j) as f64 * h)).sum();
    let mut prev = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
    if !prev.is_finite() {
        return Err(Error::NonConvergence("integrand is not finite".into()));
    }

    for level in 0..cfg.max_doublings {
        // Old nodes all become even nodes; the new midpoints are odd.
        even += odd;
        panels *= 2;
        h *= 0.5;
        odd = (0..panels / 2).map(|j| f(a + (2 * j + 1) as f64 * h)).sum();
        let next = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
        if !next.is_finite() {
            return Err(Error::NonConvergence("integrand is not finite".into()));
        }
        if level >= 1 && (next - prev).abs() < cfg.tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NonConvergence(format!(
        "Simpson refinement did not reach tolerance {} on [{a}, {b}]",
        cfg.tol
    )))
}

/// An evaluable probability density on `[a, b)`.
#[derive(Clone)]
pub struct Density1D {
    pdf: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    a: f64,
    b: f64,
    pub quad: QuadConfig,
}

impl fmt::Debug for Density1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Density1D")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("quad", &self.quad)
            .finish()
    }
}

impl Density1D {
    pub fn new<F>(pdf: F, a: f64, b: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return domain(format!("invalid support [{a}, {b})"));
        }
        Ok(Density1D {
            pdf: Arc::new(pdf),
            a,
            b,
            quad: QuadConfig::default(),
        })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        let height = 1.0 / (b - a);
        Self::new(move |_| height, a, b)
    }

    pub fn with_quad(mut self, quad: QuadConfig) -> Self {
        self.quad = quad;
        self
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        (self.pdf)(x)
    }

    pub fn total_mass(&self) -> Result<f64> {
        integrate(|x| self.pdf(x), self.a, self.b, &self.quad)
    }

    /// `int_a^x pdf`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        let x = x.clamp(self.a, self.b);
        integrate(|t| self.pdf(t), self.a, x, &self.quad)
    }
}

/// `-int p log p` in nats.
pub fn differential_entropy(density: &Density1D) -> Result<f64> {
    let mass = density.total_mass()?;
    if (mass - 1.0).abs() > 1e-4 {
        return Err(Error::NonNormalized { mass });
    }
    let negative = std::cell::Cell::new(None);
    let h = integrate(
        |x| {
            let p = density.pdf(x);
            if p < -1e-12 && negative.get().is_none() {
                negative.set(Some(x));
            }
            if p < DENSITY_FLOOR {
                0.0
            } else {
                -p * p.ln()
            }
        },
        density.a,
        density.b,
        &density.quad,
    )?;
    if let Some(x) = negative.get() {
        return domain(format!("density is negative at {x}"));
    }
    Ok(h)
}

/// `E[f(R)]` for `R ~ Rayleigh(scale)`, integrated on `[0, truncation]`.
/// `truncation` defaults to `8 * scale`, leaving tail mass `e^-32`.
pub fn expectation_over_rayleigh<F: Fn(f64) -> f64>(
    f: F,
    scale: f64,
    truncation: Option<f64>,
    cfg: &QuadConfig,
) -> Result<f64> {
    if !(scale > 0.0) {
        return domain(format!("Rayleigh scale must be positive, got {scale}"));
    }
    let r_max = truncation.unwrap_or(8.0 * scale);
    if !(r_max > 0.0) {
        return domain(format!("truncation must be positive, got {r_max}"));
    }
    let s2 = scale * scale;
    integrate(|r| f(r) * r / s2 * (-0.5 * r * r / s2).exp(), 0.0, r_max, cfg)
}

/// `log(2 pi)`, the entropy of the uniform phase.
pub fn uniform_phase_entropy() -> f64 {
    (2.0 * PI).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        let v = integrate(|x| x * x * x - x, 0.0, 2.0, &QuadConfig::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_entropy() {
        let d = Density1D::uniform(0.0, 2.0 * PI).unwrap();
        let h = differential_entropy(&d).unwrap();
        assert!((h - uniform_phase_entropy()).abs() < 1e-12);
        assert!((h - 1.8379).abs() < 1e-4);
    }

    #[test]
    fn truncated_normal_entropy() {
        let d = Density1D::new(|x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt(), -10.0, 10.0).unwrap();
        let h = differential_entropy(&d).unwrap();
        let expected = 0.5 * (2.0 * PI * std::f64::consts::E).ln();
        assert!((h - expected).abs() < 1e-5, "{h} vs {expected}");
    }

    #[test]
    fn unnormalized_density_rejected() {
        let d = Density1D::new(|_| 1.0, 0.0, 2.0).unwrap();
        assert!(matches!(differential_entropy(&d), Err(Error::NonNormalized { .. })));
    }

    #[test]
    fn negative_density_rejected() {
        // Integrates to 1 but dips below zero.
        let d = Density1D::new(|x: f64| 0.5 + 2.0 * (2.0 * PI * x).sin(), 0.0, 2.0).unwrap();
        assert!(differential_entropy(&d).is_err());
    }

    #[test]
    fn refinement_budget_exhaustion() {
        let cfg = QuadConfig {
            tol: 1e-14,
            initial_panels: 2,
            max_doublings: 3,
        };
        let r = integrate(|x: f64| (50.0 * x).sin(), 0.0, 3.0, &cfg);
        assert!(matches!(r, Err(Error::NonConvergence(_))));
    }

    #[test]
    fn rayleigh_moments() {
        let cfg = QuadConfig::with_tol(1e-12);
        let m0 = expectation_over_rayleigh(|_| 1.0, 1.0, None, &cfg).unwrap();
        assert!((m0 - 1.0).abs() < 1e-10);
        let m1 = expectation_over_rayleigh(|r| r, 1.0, None, &cfg).unwrap();
        assert!((m1 - (PI / 2.0).sqrt()).abs() < 1e-10);
        let m2 = expectation_over_rayleigh(|r| r * r, 1.0, None, &cfg).unwrap();
        assert!((m2 - 2.0).abs() < 1e-10);
        // Scale enters as E[R] = scale sqrt(pi/2).
        let m1s = expectation_over_rayleigh(|r| r, 0.25, None, &cfg).unwrap();
        assert!((m1s - 0.25 * (PI / 2.0).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn entropy_never_exceeds_log_length() {
        let shapes: [fn(f64) -> f64; 3] = [|x| 1.0 + 0.5 * x.sin(), |x| (-(x - 1.0).powi(2)).exp(), |x| x + 1.5];
        for shape in shapes {
            let (a, b) = (-1.0, 3.0);
            let mass = integrate(shape, a, b, &QuadConfig::with_tol(1e-12)).unwrap();
            let d = Density1D::new(move |x| shape(x) / mass, a, b).unwrap();
            let h = differential_entropy(&d).unwrap();
            assert!(h <= (b - a).ln() + 1e-6);
        }
    }
}
