//! One function per subcommand, each producing a table plus validation
//! results. Nothing here touches the filesystem.

use ismi_core::gp::{self, GpParams};
use ismi_core::knn_mi::KsgVariant;
use ismi_core::logreg::{self, DataModel, EstimatorConfig, Pairing, TrainConfig};
use ismi_core::mean::{self, MeanExampleParams};
use ismi_core::sgld::{self, SamplingScheme};
use ismi_core::{derive_seed, McEstimate};
use serde_json::json;

use crate::args::{GpArgs, GpNoisyArgs, LogregArgs, MeanArgs, SelftestArgs, SgldArgs};
use crate::selftest;
use crate::table::{col, Cell, Column, Table};

/// Validation slack for Monte Carlo comparisons, in standard errors.
pub const MC_Z: f64 = 3.0;
/// Estimator tolerance for the kNN-estimated bound against the simulated gap.
pub const LOGREG_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    /// One line per grid point.
    pub summaries: Vec<String>,
    /// Empty when every check passed.
    pub failures: Vec<String>,
    pub metadata: serde_json::Value,
}

impl Report {
    fn new(columns: Vec<Column>) -> Self {
        Report {
            table: Table::new(columns),
            summaries: Vec::new(),
            failures: Vec::new(),
            metadata: serde_json::Value::Null,
        }
    }

    fn check(&mut self, ok: bool, message: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(message());
        }
    }
}

pub fn mean_columns() -> Vec<Column> {
    vec![
        col("n", "sample size"),
        col("d", "dimension"),
        col("sigma_sq", "per-coordinate variance"),
        col("gen_exact", "exact expected generalization gap 2 sigma^2 d / n"),
        col("gen_mc", "Monte Carlo mean of the gap"),
        col("gen_mc_se", "standard error of gen_mc"),
        col("mi_per_sample", "I(W; Z_i) in nats, (d/2) log(n / (n - 1))"),
        col("ismi_bound", "per-sample bound with the chi-squared CGF bound"),
        col("full_mi_bound", "I(S; W) bound; inf because the learner is deterministic"),
    ]
}

pub fn run_mean(args: &MeanArgs) -> anyhow::Result<Report> {
    let mut report = Report::new(mean_columns());
    for &n in &args.n_grid {
        let p = MeanExampleParams::new(args.d, args.sigma_sq, n)?;
        let exact = mean::exact_gen(&p);
        let mc = mean::monte_carlo_gen(&p, args.trials, derive_seed(args.common.seed, n as u64))?;
        let mi = mean::exact_per_sample_mi(&p)?;
        let bound = mean::ismi_bound_mean_composed(&p)?;
        let full = mean::full_mi_bound_mean(&p)?;
        report.check(bound >= exact, || format!("n = {n}: bound {bound} below exact gap {exact}"));
        report.check(bound >= mc.mean - MC_Z * mc.std_error, || {
            format!("n = {n}: bound {bound} below simulated gap {} +- {}", mc.mean, mc.std_error)
        });
        report.summaries.push(format!(
            "n={n:<6} gen={exact:.6} mc={:.6}±{:.1e} I={mi:.6} bound={bound:.6} full=inf",
            mc.mean, mc.std_error
        ));
        report.table.push(vec![
            n.into(),
            args.d.into(),
            args.sigma_sq.into(),
            exact.into(),
            mc.mean.into(),
            mc.std_error.into(),
            mi.into(),
            bound.into(),
            full.into(),
        ]);
    }
    report.metadata = json!({ "loss": "squared", "learner": "sample mean" });
    Ok(report)
}

pub fn gp_columns() -> Vec<Column> {
    vec![
        col("n", "sample size"),
        col("epsilon", "probability of returning the ERM output"),
        col("gen_exact", "exact expected generalization gap epsilon sqrt(pi / (2n))"),
        col("gen_mc", "Monte Carlo mean of the gap"),
        col("gen_mc_se", "standard error of gen_mc"),
        col("mi_per_sample", "I(W; Z_i) in nats by quadrature"),
        col("ismi_bound", "sqrt(2 I(W; Z_i)); the loss is 1-sub-Gaussian"),
        col("cmi_reference", "chaining reference curve 19.0352 / sqrt(n)"),
    ]
}

fn gp_rows(n_grid: &[usize], epsilon: f64, trials: usize, seed: u64, report: &mut Report) -> anyhow::Result<()> {
    for &n in n_grid {
        let params = GpParams::new(n, epsilon)?;
        let exact = gp::exact_gen_noisy(n, epsilon);
        let mc = gp::monte_carlo_gen(params, trials, derive_seed(seed, n as u64))?;
        let mi = gp::ismi_gp(n, epsilon)?;
        let bound = gp::ismi_bound_gp(n, epsilon)?;
        let cmi = gp::cmi_reference(n);
        report.check(bound >= exact, || format!("n = {n}: bound {bound} below exact gap {exact}"));
        if n >= 2 {
            report.check(bound < cmi, || format!("n = {n}: bound {bound} not below reference {cmi}"));
        }
        report.summaries.push(format!(
            "n={n:<5} eps={epsilon} gen={exact:.6} mc={:.6}±{:.1e} I={mi:.6} bound={bound:.6} cmi={cmi:.4}",
            mc.mean, mc.std_error
        ));
        report.table.push(vec![
            n.into(),
            epsilon.into(),
            exact.into(),
            mc.mean.into(),
            mc.std_error.into(),
            mi.into(),
            bound.into(),
            cmi.into(),
        ]);
    }
    Ok(())
}

pub fn run_gp(args: &GpArgs) -> anyhow::Result<Report> {
    let mut report = Report::new(gp_columns());
    gp_rows(&args.n_grid, 1.0, args.trials, args.common.seed, &mut report)?;
    report.metadata = json!({ "loss": "-<w, z>", "learner": "ERM on the unit circle" });
    Ok(report)
}

pub fn run_gp_noisy(args: &GpNoisyArgs) -> anyhow::Result<Report> {
    let mut report = Report::new(gp_columns());
    gp_rows(&args.n_grid, args.epsilon, args.trials, args.common.seed, &mut report)?;
    for &n in &args.n_grid {
        let noisy = gp::ismi_gp(n, args.epsilon)?;
        let erm = gp::ismi_gp(n, 1.0)?;
        report.check(noisy <= erm + 1e-8, || {
            format!("n = {n}: noisy information {noisy} exceeds ERM information {erm}")
        });
    }
    report.metadata = json!({ "loss": "-<w, z>", "learner": "ERM kept w.p. epsilon, else uniform phase" });
    Ok(report)
}

pub fn sgld_columns() -> Vec<Column> {
    vec![
        col("n", "sample size"),
        col("K", "epochs"),
        col("c", "step constant, eta_t = c / t and sigma_t = sqrt(eta_t)"),
        col("L", "gradient norm bound"),
        col("R", "sub-Gaussian parameter of the loss"),
        col("ismi_analytic", "closed-form per-sample bound for sampling without replacement"),
        col("ismi_integral", "large-n integral form of ismi_analytic"),
        col("ismi_mc_mean", "mean over sampled paths of the per-path bound"),
        col("ismi_mc_se", "standard error of ismi_mc_mean"),
        col("pensia", "full-dataset baseline (R L / sqrt(n)) sqrt(c log(nK) + c)"),
        col("ratio", "pensia / ismi_analytic"),
    ]
}

pub fn run_sgld(args: &SgldArgs) -> anyhow::Result<Report> {
    let mut report = Report::new(sgld_columns());
    let (c, l, r) = (args.c, args.lipschitz, args.subgaussian);
    for &n in &args.n_grid {
        for &k in &args.epochs {
            let analytic = sgld::analytic_ismi_bound(n, k, c, l, r)?;
            let integral = sgld::analytic_ismi_bound_integral(n, k, c, l, r)?;
            let baseline = sgld::pensia_bound(n, k, c, l, r)?;
            let seed = derive_seed(derive_seed(args.common.seed, n as u64), k as u64);
            let mc: McEstimate =
                sgld::ismi_bound_monte_carlo(n, k, c, l, r, SamplingScheme::WithoutReplacement, args.trials, seed)?;
            report.check(mc.mean <= analytic + MC_Z * mc.std_error, || {
                format!("n = {n}, K = {k}: path mean {} above closed form {analytic}", mc.mean)
            });
            report.summaries.push(format!(
                "n={n:<6} K={k:<3} ismi={analytic:.6} mc={:.6}±{:.1e} pensia={baseline:.6} ratio={:.4}",
                mc.mean,
                mc.std_error,
                baseline / analytic
            ));
            report.table.push(vec![
                n.into(),
                k.into(),
                c.into(),
                l.into(),
                r.into(),
                analytic.into(),
                integral.into(),
                mc.mean.into(),
                mc.std_error.into(),
                baseline.into(),
                (baseline / analytic).into(),
            ]);
        }
    }
    report.metadata = json!({ "sampling": "without replacement", "schedule": "eta_t = c / t, sigma_t = sqrt(eta_t)" });
    Ok(report)
}

pub fn logreg_columns() -> Vec<Column> {
    vec![
        col("n", "training set size"),
        col("N", "independent training runs"),
        col("k", "neighbour count of the estimator"),
        col("gen_emp", "mean over runs of held-out 0-1 risk minus training 0-1 risk"),
        col("gen_emp_se", "standard error of gen_emp"),
        col("mi_hat", "estimated I(W; Z_1) in nats, averaged over pooled sample indices"),
        col("mi_hat_se", "standard error of mi_hat across pooled indices"),
        col("ismi_bound_hat", "sqrt(max(mi_hat, 0) / 2); the 0-1 loss is 1/2-sub-Gaussian"),
        col("ismi_bound_se", "ismi_bound_hat at mi_hat + mi_hat_se minus ismi_bound_hat"),
        col("control_mi_hat", "same estimate with W paired to another run's data"),
        col("control_bound_hat", "bound computed from control_mi_hat"),
        col("resampled_trials", "linearly separable training sets that were redrawn"),
        col("unconverged_trials", "runs that reached the iteration cap"),
        col("pooled_indices", "sample indices averaged in mi_hat"),
        col("estimator_variant", "kNN estimator variant"),
    ]
}

pub fn run_logreg(args: &LogregArgs) -> anyhow::Result<Report> {
    let mut report = Report::new(logreg_columns());
    let model = DataModel::standard();
    let train = TrainConfig::default();
    let estimator = EstimatorConfig {
        pooled_indices: args.pooled_indices,
        ..EstimatorConfig::new(args.k)
    };
    anyhow::ensure!(args.runs >= 1000, "--N must be at least 1000, got {}", args.runs);
    anyhow::ensure!(args.test_size >= 10_000, "--test-size must be at least 10000, got {}", args.test_size);
    for &n in &args.n_grid {
        let seed = derive_seed(args.common.seed, n as u64);
        let runs = logreg::run_trials(&model, n, args.runs, &train, seed)?;
        let gaps = logreg::generalization_gaps(&model, &runs, args.test_size, seed ^ logreg::TEST_STREAM_TAG)?;
        let gen = McEstimate::from_samples(&gaps);
        let est = logreg::bound_from_runs(&runs, &estimator)?;
        let control = logreg::bound_from_runs(
            &runs,
            &EstimatorConfig {
                pairing: Pairing::Shifted,
                ..estimator
            },
        )?;
        report.check(est.bound >= gen.mean - LOGREG_TOLERANCE, || {
            format!("n = {n}: estimated bound {} below gap {} by more than {LOGREG_TOLERANCE}", est.bound, gen.mean)
        });
        report.summaries.push(format!(
            "n={n:<4} gen={:.5}±{:.1e} I={:.5}±{:.1e} bound={:.4} control={:.4} resampled={} unconverged={}",
            gen.mean, gen.std_error, est.mi, est.mi_std_error, est.bound, control.bound, runs.resampled, runs.unconverged
        ));
        report.table.push(vec![
            n.into(),
            args.runs.into(),
            args.k.into(),
            gen.mean.into(),
            gen.std_error.into(),
            est.mi.into(),
            est.mi_std_error.into(),
            est.bound.into(),
            est.bound_std_error.into(),
            control.mi.into(),
            control.bound.into(),
            runs.resampled.into(),
            runs.unconverged.into(),
            args.pooled_indices.min(n).into(),
            Cell::from(est.variant.name()),
        ]);
    }
    report.metadata = json!({
        "model": { "d": 2, "mu_plus": [1.0, 1.0], "mu_minus": [-1.0, -1.0], "sigma": "4 I" },
        "trainer": {
            "method": "full-batch gradient descent from w = 0",
            "step": train.step,
            "grad_tol": train.grad_tol,
            "max_iters": train.max_iters,
        },
        "estimator": {
            "variant": KsgVariant::BiasImproved.name(),
            "k": args.k,
            "preprocessing": "per-coordinate standardisation, 1e-12 deterministic tie jitter",
            "pooled_indices": args.pooled_indices,
            "control": "W from run j + 1 paired with data of run j",
        },
        "test_size": args.test_size,
        "subgaussian": logreg::ZERO_ONE_SUB_GAUSSIAN,
    });
    Ok(report)
}

pub fn selftest_columns() -> Vec<Column> {
    vec![
        col("check", "name of the consistency check"),
        col("cases", "number of cases evaluated"),
        col("worst", "largest observed violation or error"),
        col("tolerance", "allowed violation or error"),
        col("passed", "1 if worst <= tolerance"),
    ]
}

pub fn run_selftest(args: &SelftestArgs) -> anyhow::Result<Report> {
    let mut report = Report::new(selftest_columns());
    for outcome in selftest::run_all(args.trials, args.common.seed)? {
        let passed = outcome.worst <= outcome.tolerance;
        report.check(passed, || {
            format!("{}: worst {} exceeds {}", outcome.name, outcome.worst, outcome.tolerance)
        });
        report.summaries.push(format!(
            "{:<28} cases={:<6} worst={:.3e} tol={:.0e} {}",
            outcome.name,
            outcome.cases,
            outcome.worst,
            outcome.tolerance,
            if passed { "ok" } else { "FAIL" }
        ));
        report.table.push(vec![
            Cell::from(outcome.name),
            outcome.cases.into(),
            outcome.worst.into(),
            outcome.tolerance.into(),
            usize::from(passed).into(),
        ]);
    }
    Ok(report)
}
