//! Monte Carlo drivers that turn the limit theorems into finite-size statistical
//! checks, plus the truncated-moment and series evaluators.
//!
//! Trial `t` at the `j`-th size of a config has global index `j * trials + t` and
//! draws its matrix from the stream seeded with `derive_seed(master_seed, index)`,
//! so records do not depend on how trials are scheduled over threads.

mod config;
mod summary;
mod trial;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{ExperimentConfig, ExperimentKind, ExperimentOptions, Tolerances};
pub use summary::{
    low_temp_deviation, max_entry_cdf, ok_at, pushforward_sample, summarize, Check, Metric, SummaryReport,
    IDENTITY_TOL, PUSHFORWARD_STREAM,
};
pub use trial::{run_trial, TrialRecord};

pub use crate::stats::{ks_distance, Dist, Ecdf};

use crate::ensemble::{sample_matrix, EnsembleSpec};
use crate::error::{Error, Result};
use crate::heavy_tail::TailLaw;
use crate::seed::derive_seed;
use crate::spectra::eigen_decompose;

/// Runs every trial of `cfg` on a pool of `threads` workers (0 picks the default)
/// and aggregates them. Records come back sorted by global trial index.
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<(Vec<TrialRecord>, SummaryReport)> {
    let records = run_trials(cfg, threads)?;
    let report = summarize(cfg, &records)?;
    Ok((records, report))
}

/// The trial records of `cfg` without aggregation.
pub fn run_trials(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let law = cfg.law()?;
    let jobs: Vec<(usize, u64)> = cfg
        .n_values
        .iter()
        .enumerate()
        .flat_map(|(j, &n)| (0..cfg.trials).map(move |t| (n, (j * cfg.trials + t) as u64)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| jobs.par_iter().map(|&(n, index)| run_trial(cfg, &law, n, index)).collect()))
}

/// Large-`n` value of `E[(2 beta / b_n)^k sum lambda_i^k]` on the truncated ensemble as
/// stated for the model: `2 (2 beta)^alpha k / (k - alpha)` for even `k`, zero for odd `k`.
pub fn moment_target(alpha: f64, beta: f64, k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        2.0 * (2.0 * beta).powf(alpha) * k as f64 / (k as f64 - alpha)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub k: usize,
    pub mean: f64,
    pub std_error: f64,
    pub target: f64,
}

/// Empirical mean of `(2 beta / b_n)^k sum lambda_i^k` over `trials` matrices with
/// entries truncated at `b_n / (2 beta)`. Only even `k` is accepted; see
/// [`odd_moment_check`].
pub fn moment_check(alpha: f64, beta: f64, n: usize, trials: usize, k: usize, seed: u64) -> Result<MomentEstimate> {
    if k < 2 || k % 2 == 1 {
        return Err(Error::domain(format!("moment order must be even and at least 2, got {k}")));
    }
    Ok(moment_checks(alpha, beta, n, trials, &[k], seed)?[0])
}

/// Same statistic for odd `k`, whose target is zero.
pub fn odd_moment_check(alpha: f64, beta: f64, n: usize, trials: usize, k: usize, seed: u64) -> Result<MomentEstimate> {
    if k % 2 == 0 {
        return Err(Error::domain(format!("odd moment check needs odd k, got {k}")));
    }
    Ok(moment_checks(alpha, beta, n, trials, &[k], seed)?[0])
}

/// Several orders from the same matrices. Trial `t` uses `derive_seed(seed, t)`.
pub fn moment_checks(
    alpha: f64,
    beta: f64,
    n: usize,
    trials: usize,
    ks: &[usize],
    seed: u64,
) -> Result<Vec<MomentEstimate>> {
    if trials == 0 || n == 0 {
        return Err(Error::domain("moment check needs n >= 1 and trials >= 1"));
    }
    if !(beta > 0.0) {
        return Err(Error::domain(format!("beta must be positive, got {beta}")));
    }
    let law = TailLaw::pareto(alpha)?;
    let b = law.normalizers(n)?.b_n;
    let spec = EnsembleSpec::with_truncation(n, law, Some(b / (2.0 * beta)))?;
    let per_trial: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<Vec<f64>> {
            let s = eigen_decompose(&sample_matrix(&spec, derive_seed(seed, t))?)?;
            Ok(ks
                .iter()
                .map(|&k| s.mu().iter().map(|m| (2.0 * beta * m).powi(k as i32)).sum())
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(ks
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let xs: Vec<f64> = per_trial.iter().map(|v| v[j]).collect();
            let (mean, std_error) = crate::stats::mean_and_se(&xs);
            MomentEstimate { k, mean, std_error, target: moment_target(alpha, beta, k) }
        })
        .collect())
}

/// Change of a partial sum under doubling of the number of terms above which the
/// series is reported as divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesPartialSums {
    pub terms: usize,
    /// `sum_{t <= K} (2 beta)^alpha / (2t - alpha)`
    pub e_t: f64,
    /// `sum_{n <= K} (2 beta)^alpha H_n / (2 (2n + 2 - alpha))`
    pub v_t: f64,
    pub e_t_doubled: f64,
    pub v_t_doubled: f64,
    /// Set when doubling `K` moves either sum by more than [`DIVERGENCE_THRESHOLD`].
    pub divergent: bool,
}

/// Partial sums of the mean and variance series of the high-temperature limit.
/// Both series have terms of order `1/t` and `log(n)/n`, so they grow without bound.
pub fn high_temp_series(alpha: f64, beta: f64, terms: usize) -> Result<SeriesPartialSums> {
    if terms == 0 {
        return Err(Error::domain("series needs at least one term"));
    }
    let c = (2.0 * beta).powf(alpha);
    let (mut e, mut v, mut harmonic) = (0.0, 0.0, 0.0);
    let (mut e_k, mut v_k) = (0.0, 0.0);
    for t in 1..=2 * terms {
        let tf = t as f64;
        harmonic += 1.0 / tf;
        e += c / (2.0 * tf - alpha);
        v += c * harmonic / (2.0 * (2.0 * tf + 2.0 - alpha));
        if t == terms {
            (e_k, v_k) = (e, v);
        }
    }
    let divergent = (e - e_k).abs() > DIVERGENCE_THRESHOLD || (v - v_k).abs() > DIVERGENCE_THRESHOLD;
    Ok(SeriesPartialSums { terms, e_t: e_k, v_t: v_k, e_t_doubled: e, v_t_doubled: v, divergent })
}
