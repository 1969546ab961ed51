//! k-nearest-neighbour mutual information estimation.
//!
//! Two variants are provided. [`KsgVariant::BiasImproved`] is the revised
//! estimator
//!
//! ```text
//! I = psi(k) + log N - <log n_w(i) + log n_z(i)>
//! ```
//!
//! where `rho_i` is the max-norm distance from row `i` to its k-th joint
//! neighbour and `n_w(i)`, `n_z(i)` count the other rows within `rho_i`
//! (inclusive) in each marginal space. Under the max-norm the unit-ball
//! volume ratio is 1. [`KsgVariant::Ksg1`] is the classic first KSG
//! estimator with strict counts and digamma terms.
//!
//! Every coordinate is standardised to zero mean and unit variance before
//! the search. This leaves the information unchanged but keeps one
//! coordinate's scale from dominating the max-norm.

use statrs::function::gamma::digamma;

use crate::error::{domain, Error, Result};
use crate::kdtree::{KdTree, Points};

/// Magnitude of the index-derived jitter applied before searching.
pub const TIE_JITTER: f64 = 1e-12;

/// Neighbour count used when none is given.
pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum KsgVariant {
    BiasImproved,
    Ksg1,
}

impl KsgVariant {
    pub fn name(self) -> &'static str {
        match self {
            KsgVariant::BiasImproved => "bi-ksg",
            KsgVariant::Ksg1 => "ksg1",
        }
    }
}

/// `N` paired rows `(w, z)` for kNN estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCloud {
    dim_w: usize,
    dim_z: usize,
    rows: Vec<f64>,
    k: usize,
}

impl SampleCloud {
    /// `rows` holds `N` rows of `dim_w + dim_z` values, w-part first.
    pub fn new(dim_w: usize, dim_z: usize, rows: Vec<f64>, k: usize) -> Result<Self> {
        let width = dim_w + dim_z;
        if dim_w == 0 || dim_z == 0 {
            return domain("both parts need at least one coordinate");
        }
        if rows.len() % width != 0 {
            return domain(format!("row data length {} is not a multiple of {width}", rows.len()));
        }
        let n = rows.len() / width;
        if k == 0 || n <= k {
            return domain(format!("need N > k >= 1, got N = {n}, k = {k}"));
        }
        if rows.iter().any(|v| v.is_nan()) {
            return domain("sample cloud contains NaN");
        }
        Ok(SampleCloud {
            dim_w,
            dim_z,
            rows,
            k,
        })
    }

    /// Builds a cloud from separate w and z row lists.
    pub fn from_parts(w: &[Vec<f64>], z: &[Vec<f64>], k: usize) -> Result<Self> {
        if w.len() != z.len() || w.is_empty() {
            return domain("w and z parts must have the same nonzero length");
        }
        let (dw, dz) = (w[0].len(), z[0].len());
        let mut rows = Vec::with_capacity(w.len() * (dw + dz));
        for (a, b) in w.iter().zip(z) {
            if a.len() != dw || b.len() != dz {
                return domain("ragged rows");
            }
            rows.extend_from_slice(a);
            rows.extend_from_slice(b);
        }
        Self::new(dw, dz, rows, k)
    }

    pub fn len(&self) -> usize {
        self.rows.len() / (self.dim_w + self.dim_z)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_w, self.dim_z)
    }

    fn column_is_constant(&self, c: usize) -> bool {
        let width = self.dim_w + self.dim_z;
        let first = self.rows[c];
        self.rows.iter().skip(c).step_by(width).all(|&v| v == first)
    }

    /// Per-column mean and standard deviation.
    fn column_scales(&self) -> Vec<(f64, f64)> {
        let width = self.dim_w + self.dim_z;
        let n = self.len() as f64;
        (0..width)
            .map(|c| {
                let col = || self.rows.iter().skip(c).step_by(width);
                let mean = col().sum::<f64>() / n;
                let var = col().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                (mean, var.sqrt())
            })
            .collect()
    }

    /// Standardised, jittered joint, w and z point sets.
    fn jittered_parts(&self) -> (Points, Points, Points) {
        let width = self.dim_w + self.dim_z;
        let n = self.len();
        let scales = self.column_scales();
        let mut joint = Vec::with_capacity(n * width);
        let mut w = Vec::with_capacity(n * self.dim_w);
        let mut z = Vec::with_capacity(n * self.dim_z);
        for i in 0..n {
            for c in 0..width {
                let (mean, sd) = scales[c];
                let v = (self.rows[i * width + c] - mean) / sd;
                let v = v + TIE_JITTER * (1.0 + v.abs()) * jitter_unit(i as u64, c as u64);
                joint.push(v);
                if c < self.dim_w {
                    w.push(v);
                } else {
                    z.push(v);
                }
            }
        }
        (
            Points::new(width, joint),
            Points::new(self.dim_w, w),
            Points::new(self.dim_z, z),
        )
    }
}

/// Deterministic value in `[-0.5, 0.5)` from `(row, column)`.
fn jitter_unit(row: u64, col: u64) -> f64 {
    // SplitMix64 finaliser.
    let mut x = row
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(col.wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(0x2545_F491_4F6C_DD1D);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
}

/// Estimate with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MiEstimate {
    /// Nats; may be slightly negative.
    pub value: f64,
    /// Standard error of the mean of the per-row terms. Ignores the
    /// dependence between rows, so it is a rough scale only.
    pub std_error: f64,
    pub variant: KsgVariant,
    pub k: usize,
    pub samples: usize,
}

impl MiEstimate {
    pub fn clamped(&self) -> f64 {
        self.value.max(0.0)
    }
}

/// Bias-improved KSG estimate of `I(w; z)` in nats.
pub fn knn_mi(cloud: &SampleCloud) -> Result<f64> {
    Ok(knn_mi_with(cloud, KsgVariant::BiasImproved)?.value)
}

pub fn knn_mi_with(cloud: &SampleCloud, variant: KsgVariant) -> Result<MiEstimate> {
    let width = cloud.dim_w + cloud.dim_z;
    if let Some(c) = (0..width).find(|&c| cloud.column_is_constant(c)) {
        return Err(Error::DegenerateCloud(format!("coordinate {c} is constant")));
    }
    let (joint, w, z) = cloud.jittered_parts();
    let n = cloud.len();
    let k = cloud.k;
    let joint_tree = KdTree::build(joint);
    let w_tree = KdTree::build(w);
    let z_tree = KdTree::build(z);

    let mut terms = Vec::with_capacity(n);
    for i in 0..n {
        let neighbors = joint_tree.knn(joint_tree.points().row(i), k, Some(i));
        let rho = neighbors.last().expect("k >= 1").distance;
        let wq = w_tree.points().row(i);
        let zq = z_tree.points().row(i);
        let term = match variant {
            KsgVariant::BiasImproved => {
                let nw = w_tree.count_within(wq, rho, true) - 1;
                let nz = z_tree.count_within(zq, rho, true) - 1;
                if nw == 0 || nz == 0 {
                    return Err(Error::DegenerateCloud(format!("empty marginal neighbourhood at row {i}")));
                }
                -(nw as f64).ln() - (nz as f64).ln()
            }
            KsgVariant::Ksg1 => {
                let nw = w_tree.count_within(wq, rho, false) - 1;
                let nz = z_tree.count_within(zq, rho, false) - 1;
                -digamma(nw as f64 + 1.0) - digamma(nz as f64 + 1.0)
            }
        };
        terms.push(term);
    }
    let offset = match variant {
        KsgVariant::BiasImproved => digamma(k as f64) + (n as f64).ln(),
        KsgVariant::Ksg1 => digamma(k as f64) + digamma(n as f64),
    };
    let mean = terms.iter().sum::<f64>() / n as f64;
    let var = terms.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(MiEstimate {
        value: offset + mean,
        std_error: (var / n as f64).sqrt(),
        variant,
        k,
        samples: n,
    })
}
