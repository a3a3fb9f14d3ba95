use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind};
use crate::ensemble::{max_abs_entry, sample_matrix, whp_diagnostics, EnsembleSpec};
use crate::error::Result;
use crate::free_energy::{log_z_laplace, log_z_quadrature, solve_gamma, Phase, SaddleContext};
use crate::heavy_tail::TailLaw;
use crate::seed::derive_seed;
use crate::spectra::{eigen_decompose, identity_errors, log_statistic_t};

/// Everything measured on one sampled matrix. Quantities that were not reached
/// because an earlier stage failed are `NaN` (or `None`), and `failure` says why.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    /// Global trial index: `size_index * trials + t`.
    pub trial: u64,
    pub seed: u64,
    pub n: usize,
    pub lambda1_over_bn: f64,
    pub lambda2_over_bn: f64,
    pub lambdan_over_bn: f64,
    pub max_abs_over_bn: f64,
    pub phase: Option<Phase>,
    pub gamma_over_bn: f64,
    /// `(gamma - lambda_1) / b_n`, kept separately for full precision.
    pub gap_over_bn: f64,
    pub x_n: f64,
    pub log_z_quadrature: f64,
    pub log_z_laplace: f64,
    pub t_n: f64,
    pub sumsq_over_bn2: f64,
    pub trace_over_bn: f64,
    pub big_count: Option<usize>,
    /// `(2 beta)^k sum mu_i^k` on the truncated ensemble (moment runs only).
    pub moment: f64,
    pub saddle_residual: f64,
    pub bracket_ok: Option<bool>,
    /// Larger of the relative trace and Frobenius identity errors.
    pub identity_error: f64,
    /// Four `0/1` flags of the structural checks.
    pub whp_flags: String,
    pub failure: Option<String>,
}

impl TrialRecord {
    fn empty(trial: u64, seed: u64, n: usize) -> Self {
        let nan = f64::NAN;
        Self {
            trial,
            seed,
            n,
            lambda1_over_bn: nan,
            lambda2_over_bn: nan,
            lambdan_over_bn: nan,
            max_abs_over_bn: nan,
            phase: None,
            gamma_over_bn: nan,
            gap_over_bn: nan,
            x_n: nan,
            log_z_quadrature: nan,
            log_z_laplace: nan,
            t_n: nan,
            sumsq_over_bn2: nan,
            trace_over_bn: nan,
            big_count: None,
            moment: nan,
            saddle_residual: nan,
            bracket_ok: None,
            identity_error: nan,
            whp_flags: String::new(),
            failure: None,
        }
    }

    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }

    /// `log Z / n` from the quadrature evaluator.
    pub fn free_energy(&self) -> f64 {
        self.log_z_quadrature / self.n as f64
    }
}

/// Runs trial `index` (global) at size `n`.
pub fn run_trial(cfg: &ExperimentConfig, law: &TailLaw, n: usize, index: u64) -> TrialRecord {
    let seed = derive_seed(cfg.master_seed, index);
    let mut rec = TrialRecord::empty(index, seed, n);
    if let Err(e) = fill(cfg, law, &mut rec) {
        rec.failure = Some(e.to_string());
    }
    rec
}

fn fill(cfg: &ExperimentConfig, law: &TailLaw, rec: &mut TrialRecord) -> Result<()> {
    let n = rec.n;
    let b = law.normalizers(n)?.b_n;
    let spec = EnsembleSpec::with_truncation(n, *law, cfg.truncation(b))?;
    let m = sample_matrix(&spec, rec.seed)?;
    rec.max_abs_over_bn = max_abs_entry(&m) / b;
    rec.whp_flags = whp_diagnostics(&m, cfg.options.delta, cfg.options.eps).flags();

    let s = eigen_decompose(&m)?;
    let (tr_err, fro_err) = identity_errors(&m, &s);
    rec.identity_error = tr_err.max(fro_err);
    let summary = s.summary(cfg.options.eps);
    rec.lambda1_over_bn = s.mu()[0];
    rec.lambda2_over_bn = s.mu()[1.min(n - 1)];
    rec.lambdan_over_bn = s.mu()[n - 1];
    rec.sumsq_over_bn2 = summary.sumsq_over_bn2;
    rec.trace_over_bn = summary.trace_over_bn;
    rec.big_count = Some(summary.big_count);
    if cfg.kind == ExperimentKind::MomentCheck {
        let k = cfg.options.k as i32;
        let two_beta = 2.0 * cfg.beta;
        rec.moment = s.mu().iter().map(|m| (two_beta * m).powi(k)).sum();
    }

    let ctx = SaddleContext::new(&s, cfg.beta)?;
    let sr = solve_gamma(&ctx)?;
    rec.phase = Some(sr.phase);
    rec.gamma_over_bn = sr.w;
    rec.gap_over_bn = sr.gap;
    rec.x_n = sr.x_n;
    rec.saddle_residual = sr.residual;
    rec.bracket_ok = Some(sr.bracket_valid);
    // undefined when gamma <= 0, which needs an all-negative spectrum
    rec.t_n = log_statistic_t(&s, sr.gamma).unwrap_or(f64::NAN);
    rec.log_z_laplace = log_z_laplace(&ctx, &sr)?.log_z;
    rec.log_z_quadrature = log_z_quadrature(&ctx, &sr)?.log_z;
    Ok(())
}
