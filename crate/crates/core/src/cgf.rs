//! Upper bounds on cumulant generating functions and the inverse of their
//! Legendre dual.
//!
//! A [`CgfBound`] is a convex function `psi` on `[0, b)` with
//! `psi(0) = psi'(0) = 0`. Every bound in this crate turns a mutual
//! information value `y` into a loss-scale quantity through
//!
//! ```text
//! psi*^-1(y) = inf_{0 < lambda < b} (y + psi(lambda)) / lambda
//! ```
//!
//! which is evaluated in closed form when one is registered and by a
//! derivative-free search over `log lambda` otherwise.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Points used by the convexity check.
const CONVEXITY_GRID: usize = 64;
/// Relative distance kept from a finite right endpoint.
const ENDPOINT_CLAMP: f64 = 1e-12;
/// Relative tolerance on the minimizing `log lambda`.
const SEARCH_REL_TOL: f64 = 1e-8;
const MAX_BRACKET_STEPS: usize = 200;
const MAX_GOLDEN_STEPS: usize = 400;

/// Which route [`CgfBound::inverse_dual`] takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum InverseKind {
    ClosedForm,
    Numeric,
}

/// A convex upper bound on a CGF, valid for `lambda` in `[0, upper)`.
#[derive(Clone)]
pub struct CgfBound {
    psi: RealFn,
    upper: f64,
    closed_inverse: Option<RealFn>,
    label: String,
}

impl fmt::Debug for CgfBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CgfBound")
            .field("label", &self.label)
            .field("upper", &self.upper)
            .field("inverse_kind", &self.inverse_kind())
            .finish()
    }
}

impl CgfBound {
    /// Wraps `psi` on `[0, upper)` after checking the invariants.
    pub fn new<F>(label: impl Into<String>, psi: F, upper: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(upper > 0.0) {
            return domain(format!("right endpoint must be positive, got {upper}"));
        }
        let bound = CgfBound {
            psi: Arc::new(psi),
            upper,
            closed_inverse: None,
            label: label.into(),
        };
        bound.validate()?;
        Ok(bound)
    }

    /// Registers a closed-form inverse dual.
    pub fn with_closed_inverse<G>(mut self, inverse: G) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.closed_inverse = Some(Arc::new(inverse));
        self
    }

    /// Drops the closed form so that only the numeric route remains.
    pub fn numeric_only(&self) -> Self {
        CgfBound {
            closed_inverse: None,
            ..self.clone()
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn psi(&self, lambda: f64) -> f64 {
        (self.psi)(lambda)
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn inverse_kind(&self) -> InverseKind {
        if self.closed_inverse.is_some() {
            InverseKind::ClosedForm
        } else {
            InverseKind::Numeric
        }
    }

    /// Largest `lambda` the search will evaluate.
    fn search_cap(&self) -> f64 {
        if self.upper.is_finite() {
            self.upper * (1.0 - ENDPOINT_CLAMP)
        } else {
            f64::INFINITY
        }
    }

    /// Checks `psi(0) = 0`, a vanishing right-derivative at 0 and midpoint
    /// convexity on a grid. A validation aid, not a proof.
    pub fn validate(&self) -> Result<()> {
        let at_zero = self.psi(0.0);
        if !at_zero.is_finite() || at_zero.abs() > 1e-12 {
            return domain(format!("{}: psi(0) = {at_zero}, expected 0", self.label));
        }

        let span = if self.upper.is_finite() {
            self.search_cap()
        } else {
            10.0
        };
        let scale = 1.0 + self.psi(0.5 * span).abs() / (0.5 * span);
        let mut prev_slope = f64::INFINITY;
        for h in [1e-4, 1e-5, 1e-6].map(|h| h * span) {
            let slope = self.psi(h) / h;
            if !slope.is_finite() || slope.abs() > prev_slope.abs().max(1e-3 * scale) {
                return domain(format!(
                    "{}: psi'(0) does not vanish (slope {slope} at {h})",
                    self.label
                ));
            }
            prev_slope = slope;
        }
        if prev_slope.abs() > 1e-3 * scale {
            return domain(format!("{}: psi'(0) = {prev_slope}, expected 0", self.label));
        }

        let step = span / CONVEXITY_GRID as f64;
        let values: Vec<f64> = (0..=CONVEXITY_GRID)
            .map(|j| self.psi(step * j as f64))
            .collect();
        for (j, w) in values.windows(3).enumerate() {
            if w.iter().any(|v| !v.is_finite()) {
                return domain(format!("{}: psi not finite near {}", self.label, step * j as f64));
            }
            let slack = 1e-10 * (1.0 + w[0].abs() + w[2].abs());
            if w[1] > 0.5 * (w[0] + w[2]) + slack {
                return domain(format!(
                    "{}: psi fails midpoint convexity at {}",
                    self.label,
                    step * (j + 1) as f64
                ));
            }
        }
        Ok(())
    }

    /// `psi*^-1(y)`, through the closed form when one is registered.
    pub fn inverse_dual(&self, y: f64) -> Result<f64> {
        check_level(y)?;
        if y == 0.0 {
            return Ok(0.0);
        }
        if y.is_infinite() {
            return Ok(f64::INFINITY);
        }
        match &self.closed_inverse {
            Some(inv) => Ok(inv(y)),
            None => self.inverse_dual_numeric(y),
        }
    }

    /// `inf (y + psi(lambda)) / lambda` by golden-section search over
    /// `log lambda`, ignoring any closed form.
    pub fn inverse_dual_numeric(&self, y: f64) -> Result<f64> {
        check_level(y)?;
        if y == 0.0 {
            return Ok(0.0);
        }
        if y.is_infinite() {
            return Ok(f64::INFINITY);
        }
        let cap = self.search_cap();
        let log_cap = cap.ln();
        let objective = |t: f64| {
            let lambda = t.exp();
            (y + self.psi(lambda)) / lambda
        };

        // Bracket a minimum in t = log(lambda), starting at lambda = 1.
        let mut mid = 0.0_f64.min(log_cap - 1.0);
        let mut step = 1.0;
        let mut lo = mid - step;
        let mut hi = (mid + step).min(log_cap);
        let (mut f_lo, mut f_mid, mut f_hi) = (objective(lo), objective(mid), objective(hi));
        let mut steps = 0;
        loop {
            if f_mid <= f_lo && f_mid <= f_hi {
                break;
            }
            steps += 1;
            if steps > MAX_BRACKET_STEPS {
                return Err(Error::NonConvergence(format!(
                    "{}: no bracket for y = {y}",
                    self.label
                )));
            }
            step *= 2.0;
            if f_lo < f_mid {
                // Minimum lies to the left.
                hi = mid;
                f_hi = f_mid;
                mid = lo;
                f_mid = f_lo;
                lo = mid - step;
                f_lo = objective(lo);
            } else {
                if hi >= log_cap {
                    // Still decreasing at the clamped endpoint: the infimum
                    // is approached at b.
                    return Ok(f_hi);
                }
                lo = mid;
                f_lo = f_mid;
                mid = hi;
                f_mid = f_hi;
                hi = (mid + step).min(log_cap);
                f_hi = objective(hi);
                if hi > 700.0 || f_hi.is_nan() {
                    return Err(Error::NonConvergence(format!(
                        "{}: objective still decreasing as lambda grows (y = {y})",
                        self.label
                    )));
                }
            }
            if !f_lo.is_finite() && lo < -700.0 {
                return Err(Error::NonConvergence(format!(
                    "{}: objective diverges toward lambda = 0",
                    self.label
                )));
            }
        }

        // Golden-section refinement.
        let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (lo, hi);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut fc, mut fd) = (objective(c), objective(d));
        let mut best = f_mid.min(fc).min(fd);
        for _ in 0..MAX_GOLDEN_STEPS {
            if (b - a).abs() <= SEARCH_REL_TOL * (1.0 + 0.5 * (a + b).abs()) {
                return Ok(best.min(objective(0.5 * (a + b))));
            }
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = objective(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = objective(d);
            }
            best = best.min(fc).min(fd);
        }
        Err(Error::NonConvergence(format!(
            "{}: golden-section search did not stabilise for y = {y}",
            self.label
        )))
    }
}

fn check_level(y: f64) -> Result<()> {
    if y.is_nan() || y < 0.0 {
        return domain(format!("information level must be nonnegative, got {y}"));
    }
    Ok(())
}

/// `psi*^-1(y)` for `bound`.
pub fn legendre_dual_inverse(bound: &CgfBound, y: f64) -> Result<f64> {
    bound.inverse_dual(y)
}

/// Sub-Gaussian parameter `R` of a loss.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SubGaussian(f64);

impl SubGaussian {
    pub fn new(r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return domain(format!("sub-Gaussian parameter must be positive, got {r}"));
        }
        Ok(SubGaussian(r))
    }

    /// Parameter implied by Hoeffding's lemma for a loss in `[lo, hi]`.
    pub fn hoeffding(lo: f64, hi: f64) -> Result<Self> {
        Self::new((hi - lo) / 2.0)
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn cgf(self) -> CgfBound {
        sub_gaussian_cgf(self.0).expect("validated parameter")
    }
}

/// `psi(lambda) = R^2 lambda^2 / 2` on `[0, inf)`, inverse `sqrt(2 R^2 y)`.
pub fn sub_gaussian_cgf(r: f64) -> Result<CgfBound> {
    let r = SubGaussian::new(r)?.get();
    let r2 = r * r;
    Ok(
        CgfBound::new(format!("sub-gaussian(R={r})"), move |l| 0.5 * r2 * l * l, f64::INFINITY)?
            .with_closed_inverse(move |y| (2.0 * r2 * y).sqrt()),
    )
}

/// Quadratic bound `d s^2 lambda^2` (with `s = sigma_l_sq`) on the lower
/// tail CGF of a `sigma_l_sq * chi^2_d` loss, mapped to `lambda >= 0`.
/// Inverse dual `2 sqrt(d s^2 y)`.
pub fn chi_squared_neg_cgf(d: usize, sigma_l_sq: f64) -> Result<CgfBound> {
    if d == 0 {
        return domain("dimension must be at least 1");
    }
    if !(sigma_l_sq > 0.0) || !sigma_l_sq.is_finite() {
        return domain(format!("variance scale must be positive, got {sigma_l_sq}"));
    }
    let a = d as f64 * sigma_l_sq * sigma_l_sq;
    Ok(CgfBound::new(
        format!("chi-squared lower tail(d={d}, s={sigma_l_sq})"),
        move |l| a * l * l,
        f64::INFINITY,
    )?
    .with_closed_inverse(move |y| 2.0 * (a * y).sqrt()))
}

/// Exact CGF of `sigma_l_sq * chi^2_d` centred at its mean, defined for
/// `lambda < 1 / (2 sigma_l_sq)`.
pub fn chi_squared_exact_cgf(d: usize, sigma_l_sq: f64, lambda: f64) -> f64 {
    let d = d as f64;
    let u = 2.0 * sigma_l_sq * lambda;
    if u >= 1.0 {
        return f64::INFINITY;
    }
    -d * sigma_l_sq * lambda - 0.5 * d * (-u).ln_1p()
}
