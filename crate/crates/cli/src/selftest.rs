//! Fast consistency checks against closed forms and brute-force oracles.

use ismi_core::cgf::{chi_squared_neg_cgf, sub_gaussian_cgf, CgfBound};
use ismi_core::gp::phase_density;
use ismi_core::kdtree::{brute_count_within, brute_knn, KdTree, Points};
use ismi_core::mean::{exact_per_sample_mi, per_sample_mi_from_covariance, MeanExampleParams};
use ismi_core::oracle::random_product_joint;
use ismi_core::{chain_rule_gap, derive_seed, discrete_mi, substream};
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub name: &'static str,
    pub cases: usize,
    pub worst: f64,
    pub tolerance: f64,
}

/// 30 log-spaced information levels in `[1e-6, 1e2]`.
pub fn log_grid() -> Vec<f64> {
    (0..30).map(|i| 10f64.powf(-6.0 + 8.0 * i as f64 / 29.0)).collect()
}

/// Largest relative gap between numeric and closed-form inverse duals.
pub fn worst_inverse_error(bound: &CgfBound) -> ismi_core::Result<f64> {
    let numeric = bound.numeric_only();
    let mut worst: f64 = 0.0;
    for y in log_grid() {
        let exact = bound.inverse_dual(y)?;
        let approx = numeric.inverse_dual(y)?;
        worst = worst.max((approx - exact).abs() / exact);
    }
    Ok(worst)
}

fn dual_checks() -> ismi_core::Result<Vec<Outcome>> {
    let mut sub = 0.0f64;
    for r in [0.25, 1.0, 3.0] {
        sub = sub.max(worst_inverse_error(&sub_gaussian_cgf(r)?)?);
    }
    let mut chi = 0.0f64;
    for d in [1, 2, 5] {
        for s in [0.5, 1.1] {
            chi = chi.max(worst_inverse_error(&chi_squared_neg_cgf(d, s)?)?);
        }
    }
    Ok(vec![
        Outcome { name: "dual-inverse/sub-gaussian", cases: 90, worst: sub, tolerance: 1e-6 },
        Outcome { name: "dual-inverse/chi-squared", cases: 180, worst: chi, tolerance: 1e-6 },
    ])
}

/// Largest violations of `sum I(W; Z_i) <= I(S; W)` and of the square-root
/// bound ordering over random product-marginal joints.
pub fn chain_rule_violations(trials: usize, seed: u64) -> ismi_core::Result<(f64, f64)> {
    let (mut sum_worst, mut sqrt_worst) = (0.0f64, 0.0f64);
    for t in 0..trials {
        let mut rng = substream(seed, t as u64);
        let w = rng.random_range(2..=4);
        let n = rng.random_range(1..=3);
        let z_sizes: Vec<usize> = (0..n).map(|_| rng.random_range(2..=3)).collect();
        let joint = random_product_joint(w, &z_sizes, &mut rng);
        let (full, sum) = chain_rule_gap(&joint)?;
        sum_worst = sum_worst.max(sum - full);
        let mut ismi = 0.0;
        for c in 1..=n {
            ismi += (2.0 * discrete_mi(&joint, &[0], &[c])?).sqrt();
        }
        let ismi = ismi / n as f64;
        sqrt_worst = sqrt_worst.max(ismi - (2.0 * full / n as f64).sqrt());
    }
    Ok((sum_worst, sqrt_worst))
}

fn mean_oracle() -> ismi_core::Result<Outcome> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for d in 1..=4 {
        for n in [2, 3, 10, 100, 1000] {
            let p = MeanExampleParams::new(d, 1.3, n)?;
            worst = worst.max((exact_per_sample_mi(&p)? - per_sample_mi_from_covariance(&p)?).abs());
            cases += 1;
        }
    }
    Ok(Outcome { name: "gaussian-mi/mean-example", cases, worst, tolerance: 1e-12 })
}

/// Number of kd-tree answers differing from brute force.
pub fn kdtree_mismatches(instances: usize, seed: u64) -> usize {
    let mut mismatches = 0;
    for t in 0..instances {
        let mut rng = substream(seed, t as u64);
        let len = rng.random_range(10..=256);
        let dim = rng.random_range(1..=6);
        let lattice = t % 4 == 0;
        let data: Vec<f64> = (0..len * dim)
            .map(|_| {
                if lattice {
                    rng.random_range(0..4) as f64
                } else {
                    rng.random_range(-1.0..1.0)
                }
            })
            .collect();
        let points = Points::new(dim, data);
        let tree = KdTree::build(points.clone());
        let k = rng.random_range(1..len.min(12));
        for i in 0..len {
            let q = points.row(i);
            if tree.knn(q, k, Some(i)) != brute_knn(&points, q, k, Some(i)) {
                mismatches += 1;
            }
            let radius = rng.random_range(0.0..1.0);
            for inclusive in [false, true] {
                if tree.count_within(q, radius, inclusive) != brute_count_within(&points, q, radius, inclusive) {
                    mismatches += 1;
                }
            }
        }
    }
    mismatches
}

fn phase_normalisation() -> ismi_core::Result<Outcome> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in [2, 3, 10, 100, 1024] {
        for r in [0.0, 0.3, 1.0, 2.5, 6.0] {
            let mass = phase_density(r, n)?.density().total_mass()?;
            worst = worst.max((mass - 1.0).abs());
            cases += 1;
        }
    }
    Ok(Outcome { name: "phase-density/normalisation", cases, worst, tolerance: 1e-6 })
}

pub fn run_all(trials: usize, seed: u64) -> ismi_core::Result<Vec<Outcome>> {
    let mut out = dual_checks()?;
    let (sum, sqrt) = chain_rule_violations(trials, derive_seed(seed, 1))?;
    out.push(Outcome { name: "chain-rule/sum", cases: trials, worst: sum, tolerance: 1e-9 });
    out.push(Outcome { name: "chain-rule/sqrt-bound", cases: trials, worst: sqrt, tolerance: 1e-9 });
    out.push(mean_oracle()?);
    out.push(Outcome {
        name: "kdtree/brute-force",
        cases: 50,
        worst: kdtree_mismatches(50, derive_seed(seed, 2)) as f64,
        tolerance: 0.0,
    });
    out.push(phase_normalisation()?);
    Ok(out)
}
