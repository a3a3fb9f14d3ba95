//! Spectra of sampled matrices and the spectral statistics used throughout.
//!
//! Everything that feeds the free energy is computed on the rescaled values
//! `mu_i = lambda_i / b_n`; raw eigenvalues for small `alpha` can exceed 1e9.

pub mod eigen;

use serde::Serialize;

use crate::ensemble::SampledMatrix;
use crate::error::{Error, Result};

/// Eigenvalues sorted in nonincreasing order together with their rescaled copy.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    eigs: Vec<f64>,
    b_n: f64,
    mu: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda_n: f64,
    pub trace_over_bn: f64,
    pub sumsq_over_bn2: f64,
    pub gap_over_bn: f64,
    /// `#{i : |lambda_i| > b_n n^{-eps}}` for the `eps` the summary was built with.
    pub big_count: usize,
    pub eps: f64,
    /// `max(|lambda_1|, |lambda_n|)`
    pub gamma_max: f64,
}

impl Spectrum {
    /// Sorts `eigs` descending (stable) and attaches `b_n`.
    pub fn new(mut eigs: Vec<f64>, b_n: f64) -> Result<Self> {
        if eigs.is_empty() {
            return Err(Error::input("spectrum needs at least one eigenvalue"));
        }
        if eigs.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("spectrum contains non-finite values"));
        }
        if !(b_n > 0.0) {
            return Err(Error::input("b_n must be positive"));
        }
        eigs.sort_by(|a, b| b.total_cmp(a));
        let mu = eigs.iter().map(|v| v / b_n).collect();
        Ok(Self { eigs, b_n, mu })
    }

    /// Builds a spectrum directly from rescaled values `mu_i`.
    pub fn from_rescaled(mu: Vec<f64>, b_n: f64) -> Result<Self> {
        let mut s = Self::new(mu.iter().map(|m| m * b_n).collect(), b_n)?;
        let mut mu = mu;
        mu.sort_by(|a, b| b.total_cmp(a));
        s.mu = mu;
        Ok(s)
    }

    pub fn eigs(&self) -> &[f64] {
        &self.eigs
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn b_n(&self) -> f64 {
        self.b_n
    }

    pub fn n(&self) -> usize {
        self.eigs.len()
    }

    pub fn lambda1(&self) -> f64 {
        self.eigs[0]
    }

    pub fn mu1(&self) -> f64 {
        self.mu[0]
    }

    pub fn summary(&self, eps: f64) -> SpectrumSummary {
        let n = self.n();
        let lambda1 = self.eigs[0];
        let lambda2 = if n > 1 { self.eigs[1] } else { lambda1 };
        let lambda_n = self.eigs[n - 1];
        let threshold = (n as f64).powf(-eps);
        SpectrumSummary {
            lambda1,
            lambda2,
            lambda_n,
            trace_over_bn: self.mu.iter().sum(),
            sumsq_over_bn2: self.mu.iter().map(|m| m * m).sum(),
            gap_over_bn: self.mu[0] - if n > 1 { self.mu[1] } else { self.mu[0] },
            big_count: self.mu.iter().filter(|m| m.abs() > threshold).count(),
            eps,
            gamma_max: lambda1.abs().max(lambda_n.abs()),
        }
    }
}

/// All eigenvalues of the sampled matrix, values only.
pub fn eigen_decompose(m: &SampledMatrix) -> Result<Spectrum> {
    if m.upper().iter().any(|v| !v.is_finite()) {
        return Err(Error::input("matrix has non-finite entries"));
    }
    let eigs = eigen::symmetric_eigenvalues(m.to_dense(), m.n())?;
    Spectrum::new(eigs, m.b_n())
}

/// Relative deviations of the trace and Frobenius identities,
/// `(|sum lambda - Tr M| / ||M||_F, |sum lambda^2 - ||M||_F^2| / ||M||_F^2)`.
pub fn identity_errors(m: &SampledMatrix, s: &Spectrum) -> (f64, f64) {
    let fro_sq = m.frobenius_sq();
    if fro_sq == 0.0 {
        let any = s.eigs().iter().any(|&v| v != 0.0);
        return if any { (f64::INFINITY, f64::INFINITY) } else { (0.0, 0.0) };
    }
    let tr: f64 = s.eigs().iter().sum();
    let sq: f64 = s.eigs().iter().map(|v| v * v).sum();
    ((tr - m.trace()).abs() / fro_sq.sqrt(), (sq - fro_sq).abs() / fro_sq)
}

/// `T_n = -sum_i log(1 - lambda_i / gamma)`, evaluated on `mu_i` and `gamma / b_n`.
///
/// Every factor `1 - lambda_i / gamma` is positive only when `gamma > max(lambda_1, 0)`.
pub fn log_statistic_t(s: &Spectrum, gamma: f64) -> Result<f64> {
    if !(gamma > s.lambda1() && gamma > 0.0) {
        return Err(Error::domain(format!("T_n needs gamma > max(lambda_1, 0) = {}, got {gamma}", s.lambda1().max(0.0))));
    }
    let w = gamma / s.b_n();
    Ok(-s.mu().iter().map(|m| (-m / w).ln_1p()).sum::<f64>())
}

/// `S_k = sum_i (lambda_i / gamma)^k` for `k = 1..=k_max`.
pub fn power_sums(s: &Spectrum, gamma: f64, k_max: usize) -> Result<Vec<f64>> {
    if !(gamma > 0.0) {
        return Err(Error::domain(format!("power sums need gamma > 0, got {gamma}")));
    }
    let w = gamma / s.b_n();
    let mut sums = vec![0.0; k_max];
    for &m in s.mu() {
        let r = m / w;
        let mut p = 1.0;
        for sk in sums.iter_mut() {
            p *= r;
            *sk += p;
        }
    }
    Ok(sums)
}
