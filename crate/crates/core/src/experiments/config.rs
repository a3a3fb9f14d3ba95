use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heavy_tail::{SlowVariation, TailLaw};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    PhaseProbability,
    Frechet,
    LowTempLimit,
    HighTempStability,
    MomentCheck,
    TraceDiagnostics,
}

/// Pass/fail thresholds. The limits come without rates, so these are calibrated constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `|P(F1) - exp(-(2 beta)^alpha)|`
    pub phase: f64,
    /// KS of `lambda_1 / b_n` against the Fréchet law
    pub frechet_ks: f64,
    /// KS of `max |M_ij| / b_n` against its exact law; `None` means `1.36 / sqrt(trials)`
    pub max_entry_ks: Option<f64>,
    /// KS of `log Z / n` on F2 against the pushforward of the conditional law
    pub low_temp_ks: f64,
    /// median of `|log Z / n - limit(lambda_1 / b_n)|` on F2
    pub low_temp_median: f64,
    /// two-sample KS of `log Z | F1` between consecutive sizes
    pub high_temp_ks: f64,
    /// median high-temperature residual at the largest size
    pub high_temp_residual: f64,
    /// `|mean moment - target|`
    pub moment: f64,
    /// two-sample KS of `sum lambda^2 / b_n^2` between consecutive sizes
    pub trace_ks: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            phase: 0.06,
            frechet_ks: 0.08,
            max_entry_ks: None,
            low_temp_ks: 0.10,
            low_temp_median: 0.05,
            high_temp_ks: 0.12,
            high_temp_residual: 0.02,
            moment: 0.3,
            trace_ks: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentOptions {
    /// Moment order for `moment_check` (even, at least 2).
    pub k: usize,
    /// Exponent in the eigenvalue-count threshold `b_n n^{-eps}` and the dominant-entry check.
    pub eps: f64,
    /// Exponent in the two-large-entries-per-row check.
    pub delta: f64,
    /// Draws from the conditional limit law used for the low-temperature pushforward.
    pub pushforward_samples: usize,
    /// Right-tail weight of the entry law.
    pub theta: f64,
    /// Use the poly-log slowly varying factor with this exponent instead of the pure Pareto tail.
    pub poly_log_p: Option<f64>,
    pub tolerances: Tolerances,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            k: 2,
            eps: 0.1,
            delta: 0.1,
            pushforward_samples: 200_000,
            theta: 0.5,
            poly_log_p: None,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub beta: f64,
    pub n_values: Vec<usize>,
    /// Trials per size.
    pub trials: usize,
    pub master_seed: u64,
    pub kind: ExperimentKind,
    #[serde(default)]
    pub options: ExperimentOptions,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, alpha: f64, beta: f64, n_values: Vec<usize>, trials: usize, master_seed: u64) -> Self {
        Self { alpha, beta, n_values, trials, master_seed, kind, options: ExperimentOptions::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if self.n_values.is_empty() {
            return Err(Error::config("n_values must not be empty"));
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n < 2) {
            return Err(Error::config(format!("every size must be at least 2, got {n}")));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::config(format!("beta must be positive, got {}", self.beta)));
        }
        let o = &self.options;
        if self.kind == ExperimentKind::MomentCheck && (o.k < 2 || o.k % 2 == 1) {
            return Err(Error::config(format!("moment order must be even and at least 2, got {}", o.k)));
        }
        if !(o.eps > 0.0 && o.delta > 0.0) {
            return Err(Error::config("eps and delta must be positive"));
        }
        if self.kind == ExperimentKind::LowTempLimit && o.pushforward_samples == 0 {
            return Err(Error::config("pushforward_samples must be at least 1"));
        }
        self.law().map_err(|e| Error::config(e.to_string()))?;
        Ok(())
    }

    pub fn law(&self) -> Result<TailLaw> {
        let sv = match self.options.poly_log_p {
            Some(p) => SlowVariation::PolyLog { p },
            None => SlowVariation::Const,
        };
        TailLaw::new(self.alpha, sv, self.options.theta)
    }

    /// Entry cutoff `b_n / (2 beta)` for the truncated ensemble, if this kind uses one.
    pub fn truncation(&self, b_n: f64) -> Option<f64> {
        (self.kind == ExperimentKind::MomentCheck).then(|| b_n / (2.0 * self.beta))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}
