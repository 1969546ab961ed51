//! Binary classification with a two-component Gaussian mixture and
//! unregularised logistic regression.
//!
//! `Y` is uniform on `{-1, +1}` and `X | Y ~ N(mu_Y, Sigma)`. The evaluation
//! loss is the 0-1 loss, which lies in `[0, 1]` and is therefore
//! 1/2-sub-Gaussian, so the estimated bound is `sqrt(I(W; Z_1) / 2)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::gp::q_function;
use crate::knn_mi::{knn_mi_with, KsgVariant, MiEstimate, SampleCloud};
use crate::rng::{substream, McEstimate, TrialRng};

/// Sub-Gaussian parameter of any loss bounded in `[0, 1]`.
pub const ZERO_ONE_SUB_GAUSSIAN: f64 = 0.5;

/// Redraws allowed per trial before a separable-data streak is an error.
const MAX_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct DataModel {
    mu_plus: Vec<f64>,
    mu_minus: Vec<f64>,
    sigma: DMatrix<f64>,
    chol: DMatrix<f64>,
}

impl DataModel {
    pub fn new(mu_plus: Vec<f64>, mu_minus: Vec<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let d = mu_plus.len();
        if d == 0 || mu_minus.len() != d || sigma.nrows() != d || sigma.ncols() != d {
            return domain("class means and covariance must share a positive dimension");
        }
        if (&sigma - sigma.transpose()).abs().max() > 1e-12 * sigma.abs().max().max(1.0) {
            return domain("covariance must be symmetric");
        }
        let chol = sigma
            .clone()
            .cholesky()
            .ok_or_else(|| Error::SingularCovariance("covariance is not positive definite".into()))?
            .l();
        Ok(DataModel {
            mu_plus,
            mu_minus,
            sigma,
            chol,
        })
    }

    /// `d = 2`, `mu_{+1} = (1, 1)`, `mu_{-1} = (-1, -1)`, `Sigma = 4 I`.
    pub fn standard() -> Self {
        Self::new(vec![1.0, 1.0], vec![-1.0, -1.0], DMatrix::identity(2, 2) * 4.0).expect("valid model")
    }

    pub fn dim(&self) -> usize {
        self.mu_plus.len()
    }

    pub fn mean(&self, y: f64) -> &[f64] {
        if y > 0.0 {
            &self.mu_plus
        } else {
            &self.mu_minus
        }
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.sigma
    }
}

/// `n` labelled rows; `x` is row-major `n x d`, labels are `+-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(dim: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if dim == 0 || x.len() != dim * y.len() {
            return domain("feature matrix does not match label count");
        }
        if y.iter().any(|&v| v != 1.0 && v != -1.0) {
            return domain("labels must be +1 or -1");
        }
        if x.iter().any(|v| !v.is_finite()) {
            return domain("features must be finite");
        }
        Ok(Dataset { dim, x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sample(&self, i: usize) -> (&[f64], f64) {
        (&self.x[i * self.dim..(i + 1) * self.dim], self.y[i])
    }

    /// Row `i` flattened as `(x, y)`.
    pub fn row(&self, i: usize) -> Vec<f64> {
        let (x, y) = self.sample(i);
        let mut out = x.to_vec();
        out.push(y);
        out
    }

    pub fn permuted(&self, order: &[usize]) -> Self {
        let mut x = Vec::with_capacity(self.x.len());
        let mut y = Vec::with_capacity(self.y.len());
        for &i in order {
            let (xi, yi) = self.sample(i);
            x.extend_from_slice(xi);
            y.push(yi);
        }
        Dataset { dim: self.dim, x, y }
    }

    /// Rows sorted by the bit patterns of `(x, y)`.
    fn canonical(&self) -> Self {
        let mut order: Vec<usize> = (0..self.len()).collect();
        let key = |i: usize| {
            let (x, y) = self.sample(i);
            x.iter().chain(std::iter::once(&y)).map(|v| v.to_bits()).collect::<Vec<u64>>()
        };
        order.sort_by_cached_key(|&i| key(i));
        self.permuted(&order)
    }
}

pub fn generate_dataset<R: Rng + ?Sized>(model: &DataModel, n: usize, rng: &mut R) -> Result<Dataset> {
    if n == 0 {
        return domain("n must be at least 1");
    }
    let d = model.dim();
    let mut x = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let label = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let xi = DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
        let shifted = &model.chol * xi;
        x.extend(shifted.iter().zip(model.mean(label)).map(|(a, m)| a + m));
        y.push(label);
    }
    Dataset::new(d, x, y)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `log(1 + e^{-m})` without overflow.
fn softplus_neg(m: f64) -> f64 {
    if m > 0.0 {
        (-m).exp().ln_1p()
    } else {
        -m + m.exp().ln_1p()
    }
}

/// `(1/n) sum log(1 + exp(-y_i w^T x_i))`.
pub fn logistic_objective(data: &Dataset, w: &[f64]) -> f64 {
    (0..data.len())
        .map(|i| {
            let (x, y) = data.sample(i);
            softplus_neg(y * dot(w, x))
        })
        .sum::<f64>()
        / data.len() as f64
}

pub fn logistic_gradient(data: &Dataset, w: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; data.dim()];
    for i in 0..data.len() {
        let (x, y) = data.sample(i);
        let m = y * dot(w, x);
        // d/dm log(1 + e^{-m}) = -1 / (1 + e^m)
        let coef = -y / (1.0 + m.exp());
        g.iter_mut().zip(x).for_each(|(gj, xj)| *gj += coef * xj);
    }
    let n = data.len() as f64;
    g.iter_mut().for_each(|v| *v /= n);
    g
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TrainConfig {
    pub step: f64,
    pub grad_tol: f64,
    pub max_iters: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            step: 0.1,
            grad_tol: 1e-6,
            max_iters: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TrainedModel {
    pub w: Vec<f64>,
    pub iterations: usize,
    pub objective: f64,
    pub gradient_norm: f64,
    pub converged: bool,
    /// Every training margin `y_i w^T x_i` is positive: the data are
    /// linearly separable and the unregularised optimum does not exist.
    pub separable: bool,
}

/// Full-batch gradient descent from `w = 0`.
///
/// Rows are put in a canonical order first, so the result is bit-identical
/// for every permutation of the training set.
pub fn train_logreg(data: &Dataset, config: &TrainConfig) -> Result<TrainedModel> {
    if data.is_empty() {
        return domain("cannot train on an empty dataset");
    }
    if !(config.step > 0.0) || !(config.grad_tol > 0.0) {
        return domain("step and tolerance must be positive");
    }
    let data = data.canonical();
    let mut w = vec![0.0; data.dim()];
    let mut g = logistic_gradient(&data, &w);
    let mut iterations = 0;
    let norm = |g: &[f64]| dot(g, g).sqrt();
    while norm(&g) >= config.grad_tol && iterations < config.max_iters {
        w.iter_mut().zip(&g).for_each(|(wj, gj)| *wj -= config.step * gj);
        g = logistic_gradient(&data, &w);
        iterations += 1;
    }
    let gradient_norm = norm(&g);
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence("gradient descent diverged".into()));
    }
    let separable = (0..data.len()).all(|i| {
        let (x, y) = data.sample(i);
        y * dot(&w, x) > 0.0
    });
    Ok(TrainedModel {
        objective: logistic_objective(&data, &w),
        converged: gradient_norm < config.grad_tol,
        w,
        iterations,
        gradient_norm,
        separable,
    })
}

/// `sign(w^T x)` with ties sent to `+1`.
pub fn classify(w: &[f64], x: &[f64]) -> f64 {
    if dot(w, x) >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

pub fn zero_one_loss(w: &[f64], x: &[f64], y: f64) -> f64 {
    if classify(w, x) == y {
        0.0
    } else {
        1.0
    }
}

pub fn empirical_risk(w: &[f64], data: &Dataset) -> f64 {
    (0..data.len())
        .map(|i| {
            let (x, y) = data.sample(i);
            zero_one_loss(w, x, y)
        })
        .sum::<f64>()
        / data.len() as f64
}

/// Population 0-1 risk of the linear rule `w` under `model`.
pub fn closed_form_error(model: &DataModel, w: &[f64]) -> f64 {
    let wv = DVector::from_column_slice(w);
    let s = (wv.transpose() * model.covariance() * &wv)[(0, 0)].sqrt();
    if s == 0.0 {
        // Every point is classified +1.
        return 0.5;
    }
    let a_plus = dot(w, model.mean(1.0)) / s;
    let a_minus = dot(w, model.mean(-1.0)) / s;
    // Error on +1 is P(w^T X < 0); error on -1 is P(w^T X >= 0).
    0.5 * q_function(a_plus) + 0.5 * q_function(-a_minus)
}

/// Draws a dataset and trains on it, redrawing separable datasets.
fn train_one(model: &DataModel, n: usize, config: &TrainConfig, rng: &mut TrialRng) -> Result<(Dataset, TrainedModel, usize)> {
    for redraws in 0..=MAX_RESAMPLES {
        let data = generate_dataset(model, n, rng)?;
        let trained = train_logreg(&data, config)?;
        if !trained.separable {
            return Ok((data, trained, redraws));
        }
    }
    Err(Error::NonConvergence(format!(
        "{MAX_RESAMPLES} consecutive separable datasets at n = {n}"
    )))
}

/// One training run per trial, trial `j` on substream `(seed, j)`.
#[derive(Debug, Clone)]
pub struct TrainingRuns {
    pub n: usize,
    pub datasets: Vec<Dataset>,
    pub models: Vec<TrainedModel>,
    /// Separable datasets that were redrawn.
    pub resampled: usize,
    /// Runs that hit the iteration cap.
    pub unconverged: usize,
}

pub fn run_trials(model: &DataModel, n: usize, trials: usize, config: &TrainConfig, seed: u64) -> Result<TrainingRuns> {
    let results: Result<Vec<_>> = (0..trials)
        .into_par_iter()
        .map(|j| train_one(model, n, config, &mut substream(seed, j as u64)))
        .collect();
    let mut runs = TrainingRuns {
        n,
        datasets: Vec::with_capacity(trials),
        models: Vec::with_capacity(trials),
        resampled: 0,
        unconverged: 0,
    };
    for (data, trained, redraws) in results? {
        runs.resampled += redraws;
        runs.unconverged += usize::from(!trained.converged);
        runs.datasets.push(data);
        runs.models.push(trained);
    }
    Ok(runs)
}

/// Test-set gaps `L_test(w_j) - L_S(w_j)`; test points for run `j` come from
/// substream `(test_seed, j)`.
pub fn generalization_gaps(model: &DataModel, runs: &TrainingRuns, test_size: usize, test_seed: u64) -> Result<Vec<f64>> {
    (0..runs.models.len())
        .into_par_iter()
        .map(|j| {
            let w = &runs.models[j].w;
            let test = generate_dataset(model, test_size, &mut substream(test_seed, j as u64))?;
            Ok(empirical_risk(w, &test) - empirical_risk(w, &runs.datasets[j]))
        })
        .collect()
}

/// Monte Carlo generalization gap of the trained classifier.
pub fn empirical_gen_error(model: &DataModel, n: usize, trials: usize, test_size: usize, seed: u64) -> Result<McEstimate> {
    if trials < 100 {
        return domain(format!("need at least 100 trials, got {trials}"));
    }
    if test_size < 10_000 {
        return domain(format!("need a test set of at least 10^4 points, got {test_size}"));
    }
    let runs = run_trials(model, n, trials, &TrainConfig::default(), seed)?;
    let gaps = generalization_gaps(model, &runs, test_size, seed ^ TEST_STREAM_TAG)?;
    Ok(McEstimate::from_samples(&gaps))
}

/// Separates test-set randomness from training randomness under one seed.
pub const TEST_STREAM_TAG: u64 = 0x07e5_75e7_0000_0001;

/// How the `W` column of the sample cloud is paired with the data column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Pairing {
    /// `W_j` with sample `index` of its own training set.
    Matched,
    /// `W_{j+1 mod N}` with sample `index` of training set `j`: same
    /// marginals, independent pairs.
    Shifted,
}

/// Sample cloud `(W, Z_index)` in dimension `d + (d + 1)`.
pub fn build_cloud(runs: &TrainingRuns, pairing: Pairing, index: usize, k: usize) -> Result<SampleCloud> {
    if index >= runs.n {
        return domain(format!("sample index {index} out of range for n = {}", runs.n));
    }
    let count = runs.models.len();
    let shift = match pairing {
        Pairing::Matched => 0,
        Pairing::Shifted => 1,
    };
    let (w_rows, z_rows): (Vec<Vec<f64>>, Vec<Vec<f64>>) = (0..count)
        .map(|j| (runs.models[(j + shift) % count].w.clone(), runs.datasets[j].row(index)))
        .unzip();
    SampleCloud::from_parts(&w_rows, &z_rows, k)
}

/// Default number of sample indices whose estimates are pooled.
pub const DEFAULT_POOLED_INDICES: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EstimatorConfig {
    pub k: usize,
    pub variant: KsgVariant,
    /// Indices `0..m` are estimated and averaged; capped at `n`.
    pub pooled_indices: usize,
    pub pairing: Pairing,
}

impl EstimatorConfig {
    pub fn new(k: usize) -> Self {
        EstimatorConfig {
            k,
            variant: KsgVariant::BiasImproved,
            pooled_indices: DEFAULT_POOLED_INDICES,
            pairing: Pairing::Matched,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BoundEstimate {
    /// `sqrt(max(I_hat, 0) / 2)`.
    pub bound: f64,
    /// Bound at `I_hat + mi_std_error` minus the bound itself.
    pub bound_std_error: f64,
    /// Mean of the per-index estimates, in nats.
    pub mi: f64,
    /// Spread of the per-index estimates over `sqrt(m)`.
    pub mi_std_error: f64,
    pub per_index: Vec<MiEstimate>,
    pub variant: KsgVariant,
    pub k: usize,
    pub n: usize,
    pub runs: usize,
    pub resampled: usize,
    pub unconverged: usize,
}

/// `sqrt(2 (1/2)^2 max(I, 0))`.
pub fn bound_from_mi(mi: f64) -> f64 {
    (2.0 * ZERO_ONE_SUB_GAUSSIAN * ZERO_ONE_SUB_GAUSSIAN * mi.max(0.0)).sqrt()
}

/// Estimated bound from `runs`.
///
/// Every per-sample term is the same by exchangeability, so the common
/// value `I(W; Z_1)` is estimated as the mean of the estimates for
/// indices `0..m`, which lowers the variance before the square root.
pub fn bound_from_runs(runs: &TrainingRuns, config: &EstimatorConfig) -> Result<BoundEstimate> {
    let m = config.pooled_indices.min(runs.n);
    if m == 0 {
        return domain("need at least one pooled index");
    }
    let per_index: Result<Vec<MiEstimate>> = (0..m)
        .into_par_iter()
        .map(|i| knn_mi_with(&build_cloud(runs, config.pairing, i, config.k)?, config.variant))
        .collect();
    let per_index = per_index?;
    let values: Vec<f64> = per_index.iter().map(|e| e.value).collect();
    let mi = values.iter().sum::<f64>() / m as f64;
    let mi_std_error = if m > 1 {
        McEstimate::from_samples(&values).std_error
    } else {
        per_index[0].std_error
    };
    let bound = bound_from_mi(mi);
    Ok(BoundEstimate {
        bound,
        bound_std_error: bound_from_mi(mi + mi_std_error) - bound,
        mi,
        mi_std_error,
        per_index,
        variant: config.variant,
        k: config.k,
        n: runs.n,
        runs: runs.models.len(),
        resampled: runs.resampled,
        unconverged: runs.unconverged,
    })
}

pub fn estimate_ismi_bound(model: &DataModel, n: usize, runs: usize, k: usize, seed: u64) -> Result<BoundEstimate> {
    estimate_ismi_bound_with(model, n, runs, &EstimatorConfig::new(k), seed)
}

pub fn estimate_ismi_bound_with(
    model: &DataModel,
    n: usize,
    runs: usize,
    config: &EstimatorConfig,
    seed: u64,
) -> Result<BoundEstimate> {
    if runs < 1000 {
        return domain(format!("need at least 1000 training runs, got {runs}"));
    }
    let trials = run_trials(model, n, runs, &TrainConfig::default(), seed)?;
    bound_from_runs(&trials, config)
}
