use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind};
use super::trial::TrialRecord;
use crate::error::Result;
use crate::free_energy::{high_temp_residual, low_temp_limit, Phase, SADDLE_RESIDUAL_TOL};
use crate::heavy_tail::{conditional_x_quantile, frechet_cdf, TailLaw};
use crate::seed::{derive_seed, stream};
use crate::stats::{ks_one_sample, ks_two_sample, mean_and_se, median, proportion, Ecdf};
use rand::Rng;

/// Trial index reserved for the pushforward stream, far outside any real trial range.
pub const PUSHFORWARD_STREAM: u64 = u64::MAX;

/// Relative tolerance of the spectral identities.
pub const IDENTITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub n: Option<usize>,
    pub value: f64,
    pub std_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryReport {
    pub kind: ExperimentKind,
    pub total_trials: usize,
    pub failed_trials: usize,
    pub metrics: Vec<Metric>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl SummaryReport {
    pub fn metric(&self, name: &str, n: Option<usize>) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name && m.n == n)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Default)]
struct Builder {
    metrics: Vec<Metric>,
    checks: Vec<Check>,
}

impl Builder {
    fn metric(&mut self, name: &str, n: Option<usize>, value: f64, std_error: Option<f64>) {
        self.metrics.push(Metric { name: name.into(), n, value, std_error });
    }

    /// Passes when `value <= threshold`.
    fn at_most(&mut self, name: String, value: f64, threshold: f64) {
        self.checks.push(Check { name, value, threshold, pass: value <= threshold });
    }
}

/// Records at size `n` that completed without failure.
pub fn ok_at(records: &[TrialRecord], n: usize) -> Vec<&TrialRecord> {
    records.iter().filter(|r| r.n == n && r.ok()).collect()
}

fn values(rs: &[&TrialRecord], f: impl Fn(&TrialRecord) -> f64) -> Vec<f64> {
    rs.iter().map(|r| f(r)).collect()
}

/// Exact distribution function of `max_{i<=j} |M_ij| / b_n` for an untruncated ensemble.
pub fn max_entry_cdf(law: &TailLaw, n: usize, b_n: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let count = (n * (n + 1) / 2) as f64;
    let t = law.tail(b_n * x).unwrap_or(1.0);
    (count * (-t).ln_1p()).exp()
}

/// `|(1/n) log Z - low_temp_limit(lambda_1 / b_n, beta)|` for an F2 record.
pub fn low_temp_deviation(r: &TrialRecord, beta: f64) -> f64 {
    match low_temp_limit(r.lambda1_over_bn, beta) {
        Ok(limit) => (r.free_energy() - limit).abs(),
        // lambda_1 sits exactly on the edge
        Err(_) => r.free_energy().abs(),
    }
}

/// Draws from the pushforward of the conditional law of `X` under `low_temp_limit`.
pub fn pushforward_sample(alpha: f64, beta: f64, count: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = stream(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p: f64 = rng.random();
        if p == 0.0 {
            continue;
        }
        let x = conditional_x_quantile(alpha, beta, p)?;
        if let Ok(v) = low_temp_limit(x, beta) {
            out.push(v);
        }
    }
    Ok(out)
}

/// Aggregates trial records into metrics and checks. Records may arrive in any
/// order; every statistic is a function of the multiset of values at each size.
pub fn summarize(cfg: &ExperimentConfig, records: &[TrialRecord]) -> Result<SummaryReport> {
    // fixed summation order makes floating-point reductions independent of arrival order
    let mut sorted = records.to_vec();
    sorted.sort_by_key(|r| (r.n, r.trial));
    let records = sorted.as_slice();
    let law = cfg.law()?;
    let tol = &cfg.options.tolerances;
    let mut b = Builder::default();
    let failed = records.iter().filter(|r| !r.ok()).count();
    b.metric("failed_trials", None, failed as f64, None);

    // invariants every completed trial must satisfy
    let done: Vec<&TrialRecord> = records.iter().filter(|r| r.ok()).collect();
    let worst_residual = done.iter().map(|r| r.saddle_residual).fold(0.0, f64::max);
    b.at_most("saddle_residual_max".into(), worst_residual, SADDLE_RESIDUAL_TOL);
    let bad_brackets = done.iter().filter(|r| r.bracket_ok != Some(true)).count();
    b.at_most("invalid_brackets".into(), bad_brackets as f64, 0.0);
    let worst_identity = done.iter().map(|r| r.identity_error).fold(0.0, f64::max);
    b.at_most("identity_error_max".into(), worst_identity, IDENTITY_TOL);
    let edge = 1.0 / (2.0 * cfg.beta);
    let inconsistent = done
        .iter()
        .filter(|r| (r.phase == Some(Phase::F1)) != (r.lambda1_over_bn < edge))
        .count();
    b.at_most("phase_inconsistencies".into(), inconsistent as f64, 0.0);

    let mut sizes = cfg.n_values.clone();
    sizes.sort_unstable();
    sizes.dedup();

    for &n in &sizes {
        let rs = ok_at(records, n);
        let f1 = rs.iter().filter(|r| r.phase == Some(Phase::F1)).count();
        let (p, se) = proportion(f1, rs.len());
        b.metric("p_f1", Some(n), p, Some(se));
    }

    match cfg.kind {
        ExperimentKind::PhaseProbability => {
            let target = (-(2.0 * cfg.beta).powf(cfg.alpha)).exp();
            b.metric("p_f1_target", None, target, None);
            for &n in &sizes {
                let p = b.metrics.iter().find(|m| m.name == "p_f1" && m.n == Some(n)).map_or(f64::NAN, |m| m.value);
                b.at_most(format!("phase_probability[n={n}]"), (p - target).abs(), tol.phase);
            }
        }
        ExperimentKind::Frechet => {
            let max_tol = tol.max_entry_ks.unwrap_or(1.36 / (cfg.trials as f64).sqrt());
            for &n in &sizes {
                let rs = ok_at(records, n);
                if rs.is_empty() {
                    continue;
                }
                let b_n = law.normalizers(n)?.b_n;
                let top = Ecdf::new(values(&rs, |r| r.lambda1_over_bn))?;
                let ks = ks_one_sample(&top, |x| frechet_cdf(cfg.alpha, x));
                b.metric("ks_lambda1_frechet", Some(n), ks, None);
                b.at_most(format!("frechet_ks[n={n}]"), ks, tol.frechet_ks);
                let maxes = Ecdf::new(values(&rs, |r| r.max_abs_over_bn))?;
                let ks_max = ks_one_sample(&maxes, |x| max_entry_cdf(&law, n, b_n, x));
                b.metric("ks_max_entry_exact", Some(n), ks_max, None);
                b.at_most(format!("max_entry_ks[n={n}]"), ks_max, max_tol);
                let ks_track = ks_one_sample(&top, |x| max_entry_cdf(&law, n, b_n, x));
                b.metric("ks_lambda1_max_entry_law", Some(n), ks_track, None);
            }
        }
        ExperimentKind::LowTempLimit => {
            let push = pushforward_sample(
                cfg.alpha,
                cfg.beta,
                cfg.options.pushforward_samples,
                derive_seed(cfg.master_seed, PUSHFORWARD_STREAM),
            )?;
            let push = Ecdf::new(push)?;
            let mut medians = Vec::new();
            for &n in &sizes {
                let f2: Vec<&TrialRecord> =
                    ok_at(records, n).into_iter().filter(|r| r.phase == Some(Phase::F2)).collect();
                b.metric("f2_trials", Some(n), f2.len() as f64, None);
                if f2.is_empty() {
                    continue;
                }
                let fe = Ecdf::new(values(&f2, TrialRecord::free_energy))?;
                let ks = ks_two_sample(&fe, &push);
                b.metric("ks_free_energy_pushforward", Some(n), ks, None);
                b.at_most(format!("low_temp_ks[n={n}]"), ks, tol.low_temp_ks);
                let med = median(&values(&f2, |r| low_temp_deviation(r, cfg.beta)));
                b.metric("median_low_temp_deviation", Some(n), med, None);
                b.at_most(format!("low_temp_median[n={n}]"), med, tol.low_temp_median);
                medians.push((n, med));
            }
            for w in medians.windows(2) {
                let ((n0, m0), (n1, m1)) = (w[0], w[1]);
                b.checks.push(Check {
                    name: format!("low_temp_median_decreasing[n={n0}->{n1}]"),
                    value: m1,
                    threshold: m0,
                    pass: m1 < m0,
                });
            }
        }
        ExperimentKind::HighTempStability => {
            let mut samples = Vec::new();
            for &n in &sizes {
                let f1: Vec<&TrialRecord> =
                    ok_at(records, n).into_iter().filter(|r| r.phase == Some(Phase::F1)).collect();
                b.metric("f1_trials", Some(n), f1.len() as f64, None);
                if f1.is_empty() {
                    continue;
                }
                let residuals: Vec<f64> = f1.iter().filter_map(|r| high_temp_residual(r.x_n, n).ok()).collect();
                let med = median(&residuals);
                b.metric("median_high_temp_residual", Some(n), med, None);
                let (m, se) = mean_and_se(&values(&f1, |r| r.log_z_quadrature));
                b.metric("mean_log_z_f1", Some(n), m, Some(se));
                let gap = median(&values(&f1, |r| (r.log_z_quadrature - r.log_z_laplace).abs()));
                b.metric("median_laplace_gap_f1", Some(n), gap, None);
                samples.push((n, Ecdf::new(values(&f1, |r| r.log_z_quadrature))?, med));
            }
            for w in samples.windows(2) {
                let ks = ks_two_sample(&w[0].1, &w[1].1);
                let (n0, n1) = (w[0].0, w[1].0);
                b.metric("ks_log_z_f1", Some(n1), ks, None);
                b.at_most(format!("high_temp_ks[n={n0}->{n1}]"), ks, tol.high_temp_ks);
            }
            if let Some((n, _, med)) = samples.last() {
                b.at_most(format!("high_temp_residual[n={n}]"), *med, tol.high_temp_residual);
            }
        }
        ExperimentKind::MomentCheck => {
            let target = super::moment_target(cfg.alpha, cfg.beta, cfg.options.k);
            b.metric("moment_target", None, target, None);
            for &n in &sizes {
                let rs = ok_at(records, n);
                let (m, se) = mean_and_se(&values(&rs, |r| r.moment));
                b.metric("moment_mean", Some(n), m, Some(se));
                b.at_most(format!("moment[n={n}]"), (m - target).abs(), tol.moment);
            }
        }
        ExperimentKind::TraceDiagnostics => {
            let mut prev: Option<(usize, Ecdf, f64)> = None;
            for &n in &sizes {
                let rs = ok_at(records, n);
                if rs.is_empty() {
                    continue;
                }
                let med = median(&values(&rs, |r| r.trace_over_bn.abs()));
                b.metric("median_abs_trace_over_bn", Some(n), med, None);
                let (bc, bc_se) = mean_and_se(&values(&rs, |r| r.big_count.unwrap_or(0) as f64));
                b.metric("mean_big_count", Some(n), bc, Some(bc_se));
                let (gap, gap_se) = mean_and_se(&values(&rs, |r| r.lambda1_over_bn - r.lambda2_over_bn));
                b.metric("mean_gap_over_bn", Some(n), gap, Some(gap_se));
                for (i, name) in ["whp_small_diagonal", "whp_large_entries", "whp_single_large", "whp_dominant"]
                    .iter()
                    .enumerate()
                {
                    let hits = rs.iter().filter(|r| r.whp_flags.as_bytes().get(i) == Some(&b'1')).count();
                    let (p, se) = proportion(hits, rs.len());
                    b.metric(name, Some(n), p, Some(se));
                }
                let sumsq = Ecdf::new(values(&rs, |r| r.sumsq_over_bn2))?;
                if let Some((n0, e0, m0)) = &prev {
                    let ks = ks_two_sample(e0, &sumsq);
                    b.metric("ks_sumsq", Some(n), ks, None);
                    b.at_most(format!("trace_ks[n={n0}->{n}]"), ks, tol.trace_ks);
                    b.checks.push(Check {
                        name: format!("trace_median_decreasing[n={n0}->{n}]"),
                        value: med,
                        threshold: *m0,
                        pass: med < *m0,
                    });
                }
                prev = Some((n, sumsq, med));
            }
        }
    }

    let passed = b.checks.iter().all(|c| c.pass);
    Ok(SummaryReport {
        kind: cfg.kind,
        total_trials: records.len(),
        failed_trials: failed,
        metrics: b.metrics,
        checks: b.checks,
        passed,
    })
}
