//! Generalization bounds assembled from mutual information values.
//!
//! `+inf` is a legitimate value throughout: a deterministic learner has
//! infinite `I(S; W)`, and the full-dataset bound then degenerates to
//! `+inf` rather than failing.

use crate::cgf::{sub_gaussian_cgf, CgfBound};
use crate::error::{domain, Result};

/// Per-sample informations `I(W; Z_i)` and optionally `I(S; W)`, in nats.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MiProfile {
    per_sample: Vec<f64>,
    full: Option<f64>,
}

impl MiProfile {
    /// Negative inputs (estimator noise) are clamped to 0; NaN is rejected.
    pub fn new(per_sample: Vec<f64>, full: Option<f64>) -> Result<Self> {
        if per_sample.is_empty() {
            return domain("profile needs at least one sample");
        }
        if per_sample.iter().chain(full.iter()).any(|v| v.is_nan()) {
            return domain("mutual information value is NaN");
        }
        Ok(MiProfile {
            per_sample: per_sample.into_iter().map(|v| v.max(0.0)).collect(),
            full: full.map(|v| v.max(0.0)),
        })
    }

    /// `n` samples sharing the same information value.
    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n], None)
    }

    pub fn with_full(mut self, full: f64) -> Result<Self> {
        if full.is_nan() {
            return domain("I(S;W) is NaN");
        }
        self.full = Some(full.max(0.0));
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.per_sample.len()
    }

    pub fn per_sample(&self) -> &[f64] {
        &self.per_sample
    }

    pub fn full(&self) -> Option<f64> {
        self.full
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum BoundMethod {
    /// Per-sample bound with general CGF bounds.
    Ismi,
    /// Per-sample bound with a sub-Gaussian loss.
    SubGaussianIsmi,
    /// `I(S; W)` bound with a sub-Gaussian loss.
    FullMi,
}

/// Two-sided bound on the expected generalization gap.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GenBound {
    /// Upper bound on `gen`.
    pub upper: f64,
    /// Upper bound on `-gen`.
    pub lower: f64,
    pub method: BoundMethod,
    pub n: usize,
}

impl GenBound {
    /// Larger of the two sides; bounds `|gen|`.
    pub fn magnitude(&self) -> f64 {
        self.upper.max(self.lower)
    }
}

fn mean_inverse(profile: &MiProfile, psi: &CgfBound) -> Result<f64> {
    let mut acc = 0.0;
    for &i in profile.per_sample() {
        acc += psi.inverse_dual(i)?;
    }
    Ok(acc / profile.n() as f64)
}

/// `gen <= (1/n) sum psi_-*^-1(I_i)` and `-gen <= (1/n) sum psi_+*^-1(I_i)`.
pub fn ismi_bound(profile: &MiProfile, psi_plus: &CgfBound, psi_minus: &CgfBound) -> Result<GenBound> {
    Ok(GenBound {
        upper: mean_inverse(profile, psi_minus)?,
        lower: mean_inverse(profile, psi_plus)?,
        method: BoundMethod::Ismi,
        n: profile.n(),
    })
}

/// `|gen| <= (1/n) sum sqrt(2 R^2 I_i)` for an `R`-sub-Gaussian loss.
pub fn sub_gaussian_ismi(profile: &MiProfile, r: f64) -> Result<GenBound> {
    let psi = sub_gaussian_cgf(r)?;
    let side = mean_inverse(profile, &psi)?;
    Ok(GenBound {
        upper: side,
        lower: side,
        method: BoundMethod::SubGaussianIsmi,
        n: profile.n(),
    })
}

/// `sqrt(2 R^2 I(S;W) / n)`; `+inf` passes through.
pub fn full_mi_bound(i_sw: f64, n: usize, r: f64) -> Result<f64> {
    if i_sw.is_nan() || i_sw < 0.0 {
        return domain(format!("I(S;W) must be nonnegative, got {i_sw}"));
    }
    if n == 0 {
        return domain("n must be positive");
    }
    if !(r > 0.0) {
        return domain(format!("sub-Gaussian parameter must be positive, got {r}"));
    }
    Ok((2.0 * r * r * i_sw / n as f64).sqrt())
}
