//! Exact mutual information: finite joint tables and Gaussian vectors.
//!
//! These are ground-truth routes used to check the bound machinery and the
//! closed forms of the worked examples.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{domain, Error, Result};

/// Probability table over `(W, Z_1, ..., Z_n)`, row-major with coordinate 0
/// varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJoint {
    shape: Vec<usize>,
    probs: Vec<f64>,
}

impl DiscreteJoint {
    pub fn new(shape: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return domain(format!("invalid alphabet sizes {shape:?}"));
        }
        let size: usize = shape.iter().product();
        if probs.len() != size {
            return domain(format!("expected {size} entries, got {}", probs.len()));
        }
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return domain("probabilities must be nonnegative");
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return domain(format!("probabilities sum to {total}"));
        }
        Ok(DiscreteJoint { shape, probs })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Number of `Z` coordinates.
    pub fn sample_count(&self) -> usize {
        self.shape.len() - 1
    }

    /// Multi-index of flat position `flat`.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for (axis, &s) in self.shape.iter().enumerate().rev() {
            idx[axis] = flat % s;
            flat /= s;
        }
        idx
    }

    /// Marginal table over `coords`, in the order given.
    pub fn marginal(&self, coords: &[usize]) -> Vec<f64> {
        let size: usize = coords.iter().map(|&c| self.shape[c]).product();
        let mut out = vec![0.0; size];
        for (flat, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let idx = self.unravel(flat);
            let mut pos = 0;
            for &c in coords {
                pos = pos * self.shape[c] + idx[c];
            }
            out[pos] += p;
        }
        out
    }

    fn entropy_of(&self, coords: &[usize]) -> f64 {
        entropy(&self.marginal(coords))
    }

    fn check_coords(&self, coords: &[usize]) -> Result<()> {
        if let Some(&c) = coords.iter().find(|&&c| c >= self.shape.len()) {
            return domain(format!("coordinate {c} out of range"));
        }
        Ok(())
    }
}

/// Shannon entropy in nats with `0 log 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&q| q > 0.0).map(|&q| q * q.ln()).sum::<f64>()
}

/// `I(A; B)` between two disjoint coordinate groups of `joint`.
pub fn discrete_mi(joint: &DiscreteJoint, coords_a: &[usize], coords_b: &[usize]) -> Result<f64> {
    joint.check_coords(coords_a)?;
    joint.check_coords(coords_b)?;
    if coords_a.is_empty() || coords_b.is_empty() {
        return domain("coordinate sets must be nonempty");
    }
    if coords_a.iter().any(|c| coords_b.contains(c)) {
        return domain(format!("coordinate sets {coords_a:?} and {coords_b:?} overlap"));
    }
    let union: Vec<usize> = coords_a.iter().chain(coords_b).copied().collect();
    let mi = joint.entropy_of(coords_a) + joint.entropy_of(coords_b) - joint.entropy_of(&union);
    Ok(mi.max(0.0))
}

/// `(I(W; S), sum_i I(W; Z_i))` for a joint whose `Z` coordinates are
/// mutually independent.
pub fn chain_rule_gap(joint: &DiscreteJoint) -> Result<(f64, f64)> {
    let n = joint.sample_count();
    if n == 0 {
        return domain("joint has no Z coordinates");
    }
    let zs: Vec<usize> = (1..=n).collect();
    let z_joint = joint.marginal(&zs);
    let singles: Vec<Vec<f64>> = zs.iter().map(|&c| joint.marginal(&[c])).collect();
    let z_shape: Vec<usize> = zs.iter().map(|&c| joint.shape[c]).collect();
    for (flat, &p) in z_joint.iter().enumerate() {
        let mut rest = flat;
        let mut prod = 1.0;
        for (axis, &s) in z_shape.iter().enumerate().rev() {
            prod *= singles[axis][rest % s];
            rest /= s;
        }
        if (p - prod).abs() > 1e-9 {
            return Err(Error::Precondition(format!(
                "Z marginal is not a product distribution (|{p} - {prod}| > 1e-9)"
            )));
        }
    }
    let full = discrete_mi(joint, &[0], &zs)?;
    let mut per_sample = 0.0;
    for &c in &zs {
        per_sample += discrete_mi(joint, &[0], &[c])?;
    }
    Ok((full, per_sample))
}

/// Draws a joint with independent `Z_i` marginals and an arbitrary
/// `P(W | Z_1..Z_n)`, all from normalized exponential weights.
pub fn random_product_joint<R: Rng + ?Sized>(
    w_size: usize,
    z_sizes: &[usize],
    rng: &mut R,
) -> DiscreteJoint {
    let mut draw = |len: usize| -> Vec<f64> {
        let v: Vec<f64> = (0..len).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = v.iter().sum();
        v.into_iter().map(|x| x / total).collect()
    };
    let marginals: Vec<Vec<f64>> = z_sizes.iter().map(|&s| draw(s)).collect();
    let z_count: usize = z_sizes.iter().product();
    let conditionals: Vec<Vec<f64>> = (0..z_count).map(|_| draw(w_size)).collect();

    let mut probs = Vec::with_capacity(w_size * z_count);
    for w in 0..w_size {
        for zf in 0..z_count {
            let mut rest = zf;
            let mut pz = 1.0;
            for (axis, &s) in z_sizes.iter().enumerate().rev() {
                pz *= marginals[axis][rest % s];
                rest /= s;
            }
            probs.push(pz * conditionals[zf][w]);
        }
    }
    // Renormalize away rounding so the 1e-12 sum check always holds.
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    let mut shape = vec![w_size];
    shape.extend_from_slice(z_sizes);
    DiscreteJoint::new(shape, probs).expect("constructed joint is valid")
}

/// Covariance blocks of a jointly Gaussian pair `(W, Z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianJointSpec {
    pub cov_w: DMatrix<f64>,
    pub cov_z: DMatrix<f64>,
    /// `Cov[W, Z]`, `d_W x d_Z`.
    pub cross: DMatrix<f64>,
}

impl GaussianJointSpec {
    pub fn new(cov_w: DMatrix<f64>, cov_z: DMatrix<f64>, cross: DMatrix<f64>) -> Result<Self> {
        let (dw, dz) = (cov_w.nrows(), cov_z.nrows());
        if !cov_w.is_square() || !cov_z.is_square() || cross.shape() != (dw, dz) {
            return domain("covariance block shapes are inconsistent");
        }
        Ok(GaussianJointSpec { cov_w, cov_z, cross })
    }

    /// Scalar pair with unit variances and correlation `rho`.
    pub fn bivariate(rho: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&rho) {
            return domain(format!("correlation {rho} outside [-1, 1]"));
        }
        Self::new(
            DMatrix::identity(1, 1),
            DMatrix::identity(1, 1),
            DMatrix::from_element(1, 1, rho),
        )
    }

    /// Sample mean of `n` draws from `N(mu, sigma_sq I_d)` against one of
    /// the draws: blocks `Sigma/n`, `Sigma`, cross `Sigma/n`.
    pub fn sample_mean_vs_sample(d: usize, sigma_sq: f64, n: usize) -> Result<Self> {
        if d == 0 || n == 0 || !(sigma_sq > 0.0) {
            return domain("need d >= 1, n >= 1 and sigma_sq > 0");
        }
        let sigma = DMatrix::<f64>::identity(d, d) * sigma_sq;
        let over_n = &sigma / n as f64;
        Self::new(over_n.clone(), sigma, over_n)
    }

    pub fn joint(&self) -> DMatrix<f64> {
        let (dw, dz) = (self.cov_w.nrows(), self.cov_z.nrows());
        let mut m = DMatrix::zeros(dw + dz, dw + dz);
        m.view_mut((0, 0), (dw, dw)).copy_from(&self.cov_w);
        m.view_mut((dw, dw), (dz, dz)).copy_from(&self.cov_z);
        m.view_mut((0, dw), (dw, dz)).copy_from(&self.cross);
        m.view_mut((dw, 0), (dz, dw)).copy_from(&self.cross.transpose());
        m
    }
}

/// `log det` via Cholesky; `None` when the matrix is not positive definite.
fn log_det_spd(m: &DMatrix<f64>) -> Option<f64> {
    let chol = nalgebra::Cholesky::new(m.clone())?;
    let diag = chol.l_dirty().diagonal();
    let mut acc = 0.0;
    for &x in diag.iter() {
        if !(x > 0.0) {
            return None;
        }
        acc += 2.0 * x.ln();
    }
    Some(acc)
}

/// `I(W; Z) = 1/2 log(|Cov W| |Cov Z| / |Cov (W, Z)|)` in nats.
///
/// A singular joint covariance with nonsingular marginals means `W` and `Z`
/// are deterministically related; that case returns `+inf`.
pub fn gaussian_mi(spec: &GaussianJointSpec) -> Result<f64> {
    let lw = log_det_spd(&spec.cov_w)
        .ok_or_else(|| Error::SingularCovariance("Cov[W] is not positive definite".into()))?;
    let lz = log_det_spd(&spec.cov_z)
        .ok_or_else(|| Error::SingularCovariance("Cov[Z] is not positive definite".into()))?;
    match log_det_spd(&spec.joint()) {
        Some(lj) => Ok((0.5 * (lw + lz - lj)).max(0.0)),
        None => Ok(f64::INFINITY),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    /// Independent route: sum p(a,b) log(p(a,b) / (p(a) p(b))) over the
    /// full table with W = coord 0 and one Z coordinate.
    fn double_sum_mi(joint: &DiscreteJoint, z: usize) -> f64 {
        let shape = joint.shape();
        let mut pab = vec![vec![0.0; shape[z]]; shape[0]];
        for (flat, &p) in joint.probs().iter().enumerate() {
            let idx = joint.unravel(flat);
            pab[idx[0]][idx[z]] += p;
        }
        let pa: Vec<f64> = pab.iter().map(|row| row.iter().sum()).collect();
        let pb: Vec<f64> = (0..shape[z]).map(|b| pab.iter().map(|row| row[b]).sum()).collect();
        let mut mi = 0.0;
        for a in 0..shape[0] {
            for b in 0..shape[z] {
                if pab[a][b] > 0.0 {
                    mi += pab[a][b] * (pab[a][b] / (pa[a] * pb[b])).ln();
                }
            }
        }
        mi
    }

    #[test]
    fn perfectly_correlated_bit() {
        let j = DiscreteJoint::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let mi = discrete_mi(&j, &[0], &[1]).unwrap();
        assert!((mi - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn independent_coordinates() {
        let pw = [0.3, 0.7];
        let pz = [0.2, 0.5, 0.3];
        let probs = pw.iter().flat_map(|a| pz.iter().map(move |b| a * b)).collect();
        let j = DiscreteJoint::new(vec![2, 3], probs).unwrap();
        assert!(discrete_mi(&j, &[0], &[1]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn random_2x2x2_matches_double_sum() {
        let mut rng = substream(11, 0);
        for _ in 0..50 {
            let j = random_product_joint(2, &[2, 2], &mut rng);
            for z in 1..=2 {
                let a = discrete_mi(&j, &[0], &[z]).unwrap();
                let b = double_sum_mi(&j, z);
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn overlapping_sets_rejected() {
        let j = DiscreteJoint::new(vec![2, 2], vec![0.25; 4]).unwrap();
        assert!(matches!(discrete_mi(&j, &[0, 1], &[1]), Err(Error::Domain(_))));
    }

    #[test]
    fn table_validation() {
        assert!(DiscreteJoint::new(vec![2], vec![0.5, 0.6]).is_err());
        assert!(DiscreteJoint::new(vec![2], vec![1.5, -0.5]).is_err());
        assert!(DiscreteJoint::new(vec![3], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn chain_rule_equality_case() {
        // W = (Z1, Z2) with independent fair bits.
        let mut probs = vec![0.0; 4 * 2 * 2];
        for z1 in 0..2 {
            for z2 in 0..2 {
                let w = 2 * z1 + z2;
                probs[(w * 2 + z1) * 2 + z2] = 0.25;
            }
        }
        let j = DiscreteJoint::new(vec![4, 2, 2], probs).unwrap();
        let (full, sum) = chain_rule_gap(&j).unwrap();
        let two_ln2 = 2.0 * 2f64.ln();
        assert!((full - two_ln2).abs() < 1e-14);
        assert!((sum - two_ln2).abs() < 1e-14);
    }

    #[test]
    fn chain_rule_independent_w() {
        let pw = [0.1, 0.2, 0.7];
        let mut probs = Vec::new();
        for a in pw {
            for _ in 0..4 {
                probs.push(a * 0.25);
            }
        }
        let j = DiscreteJoint::new(vec![3, 2, 2], probs).unwrap();
        let (full, sum) = chain_rule_gap(&j).unwrap();
        assert!(full.abs() < 1e-12 && sum.abs() < 1e-12);
    }

    #[test]
    fn chain_rule_requires_product_marginal() {
        // Z1 = Z2.
        let j = DiscreteJoint::new(vec![1, 2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(matches!(chain_rule_gap(&j), Err(Error::Precondition(_))));
    }

    #[test]
    fn chain_rule_inequality_on_random_joints() {
        let mut rng = substream(5, 1);
        for trial in 0..1000 {
            let n = 1 + trial % 3;
            let w = 2 + trial % 3;
            let z: Vec<usize> = (0..n).map(|i| 2 + (trial + i) % 2).collect();
            let j = random_product_joint(w, &z, &mut rng);
            let (full, sum) = chain_rule_gap(&j).unwrap();
            assert!(sum <= full + 1e-9, "trial {trial}: {sum} > {full}");
        }
    }

    #[test]
    fn gaussian_scalar_rho() {
        let mi = gaussian_mi(&GaussianJointSpec::bivariate(0.9).unwrap()).unwrap();
        let expected = -0.5 * (1.0 - 0.81f64).ln();
        assert!((mi - expected).abs() < 1e-12);
        assert!((mi - 0.8304).abs() < 1e-4);
    }

    #[test]
    fn gaussian_zero_cross_covariance() {
        let spec = GaussianJointSpec::new(
            DMatrix::identity(2, 2) * 3.0,
            DMatrix::identity(3, 3),
            DMatrix::zeros(2, 3),
        )
        .unwrap();
        assert!(gaussian_mi(&spec).unwrap().abs() < 1e-12);
    }

    #[test]
    fn gaussian_sample_mean_blocks() {
        for d in 1..=4 {
            for n in [2, 3, 10, 1000] {
                let spec = GaussianJointSpec::sample_mean_vs_sample(d, 1.7, n).unwrap();
                let expected = 0.5 * d as f64 * (n as f64 / (n as f64 - 1.0)).ln();
                assert!((gaussian_mi(&spec).unwrap() - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gaussian_deterministic_dependence_is_infinite() {
        let spec = GaussianJointSpec::bivariate(1.0).unwrap();
        assert_eq!(gaussian_mi(&spec).unwrap(), f64::INFINITY);
        // n = 1: the mean is the sample itself.
        let spec = GaussianJointSpec::sample_mean_vs_sample(2, 1.0, 1).unwrap();
        assert_eq!(gaussian_mi(&spec).unwrap(), f64::INFINITY);
    }

    #[test]
    fn gaussian_singular_marginal_is_an_error() {
        let spec = GaussianJointSpec::new(
            DMatrix::zeros(1, 1),
            DMatrix::identity(1, 1),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        assert!(matches!(gaussian_mi(&spec), Err(Error::SingularCovariance(_))));
    }
}
