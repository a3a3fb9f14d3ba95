//! Four independent evaluations of `log Z_n`.
//!
//! With `z = b_n w` and `t = b_n s` the contour representation becomes
//!
//! ```text
//! Z_n = C_n b_n^{1 - n/2} e^{(n/2) g0(w)} ∫ exp[(n/2)(g0(w + i s) - g0(w))] ds
//! ```
//!
//! where `g0` is the rescaled exponent from [`super::g_value`]. The integrand
//! `H(s)` has modulus `prod (1 + s^2/d_i^2)^{-1/4}` with `d_i = w - mu_i`, so on
//! the vertical line it only decays like `s^{-n/2}` and is not integrable for
//! `n <= 2`. The quadrature therefore follows the vertical line up to a height
//! `S` and then leaves along the ray `w + iS + r e^{3πi/4}`, on which `|H|`
//! decays like `e^{-nβr/√2}`. At `S = max d_i` every factor of `|H|` is
//! monotone along the ray; a single outlying eigenvalue makes that height huge
//! and the vertical leg hopelessly oscillatory, so the lowest `S` (from a few
//! Gaussian widths upwards) on which the ray never rises above `|H(0)| = 1` is
//! used instead.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI, SQRT_2};

use super::bessel::ln_i0;
use super::saddle::{SaddleContext, SaddleResult};
use crate::ensemble::SampledMatrix;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breaks, QuadOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogZMethod {
    Quadrature,
    Laplace,
    SphereMC,
    BesselN2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogZResult {
    pub log_z: f64,
    pub method: LogZMethod,
    /// Quadrature and truncation bound (quadrature, on the log scale), size of the
    /// first neglected correction (Laplace), standard error (Monte Carlo) or 0 (closed form).
    pub error_estimate: f64,
}

const QUAD_OPTS: QuadOptions = QuadOptions { rel_tol: 1e-10, abs_tol: 0.0, max_panels: 20_000 };
// The ray is followed for RAY_DECAY e-folds of |H|.
const RAY_DECAY: f64 = 50.0;

/// `log C_n = log Γ(n/2) + (n/2 - 1) log b_n - log 2π - (n/2 - 1) log(n β)`.
pub fn log_c_n(n: usize, beta: f64, b_n: f64) -> f64 {
    let nf = n as f64;
    let half = 0.5 * nf - 1.0;
    libm::lgamma(0.5 * nf) + half * b_n.ln() - (2.0 * PI).ln() - half * (nf * beta).ln()
}

fn prefactor(ctx: &SaddleContext<'_>, sr: &SaddleResult) -> f64 {
    let n = ctx.spectrum.n() as f64;
    let b = ctx.spectrum.b_n();
    log_c_n(ctx.spectrum.n(), ctx.beta, b) + 0.5 * n * sr.g_at_gamma - 0.5 * n * b.ln()
}

fn gaps(ctx: &SaddleContext<'_>, sr: &SaddleResult) -> Vec<f64> {
    let mu = ctx.spectrum.mu();
    mu.iter().map(|m| sr.gap + (mu[0] - m)).collect()
}

/// Contour quadrature of the exact integral representation.
pub fn log_z_quadrature(ctx: &SaddleContext<'_>, sr: &SaddleResult) -> Result<LogZResult> {
    contour_log_z(ctx, sr, false)
}

fn contour_log_z(ctx: &SaddleContext<'_>, sr: &SaddleResult, full_height: bool) -> Result<LogZResult> {
    let d = gaps(ctx, sr);
    let n = d.len() as f64;
    let nb = n * ctx.beta;
    let top = d.iter().copied().fold(0.0, f64::max);

    // Vertical segment s in [0, S]: Re H(s).
    let vertical = |s: f64| {
        let (mut log_mod, mut phase) = (0.0, nb * s);
        for &di in &d {
            let r = s / di;
            log_mod -= 0.25 * (r * r).ln_1p();
            phase -= 0.5 * r.atan();
        }
        log_mod.exp() * phase.cos()
    };
    let sigma = (2.0 / (n * sr.g2_at_gamma)).sqrt();
    let length = RAY_DECAY * SQRT_2 / nb;
    let height = if full_height { top } else { ray_height(&d, nb, 4.0 * sigma, top, length) };
    let h0 = sigma.min(d[0]).min(height);
    let mut breaks = vec![0.0];
    let mut x = h0;
    while x < height {
        breaks.push(x);
        x *= 2.0;
    }
    breaks.push(height);
    let seg = integrate_with_breaks(vertical, &breaks, QUAD_OPTS)?;

    // Ray from w + iS in direction e^{3πi/4}; ds = e^{iπ/4} dr.
    let log_h = |r: f64| {
        let delta = Complex64::new(-r * FRAC_1_SQRT_2, height + r * FRAC_1_SQRT_2);
        let mut acc = nb * delta;
        for &di in &d {
            acc -= 0.5 * (1.0 + delta / di).ln();
        }
        acc
    };
    let rotation = Complex64::from_polar(1.0, FRAC_PI_4);
    let ray = |r: f64| (rotation * log_h(r).exp()).re;
    let ray_breaks: Vec<f64> = std::iter::once(0.0).chain((0..6).map(|j| length / 2f64.powi(5 - j))).collect();
    // the tail only needs to be accurate relative to the whole integral
    let tail_opts = QuadOptions { abs_tol: QUAD_OPTS.rel_tol * seg.value.abs(), ..QUAD_OPTS };
    let tail = integrate_with_breaks(ray, &ray_breaks, tail_opts)?;
    // beyond the end |H| keeps decaying at least like e^{-nβr/√2}
    let truncation = log_h(0.0).re.max(log_h(length).re + RAY_DECAY).exp() * (-RAY_DECAY).exp() * SQRT_2 / nb;

    let integral = 2.0 * (seg.value + tail.value);
    let abs_err = 2.0 * (seg.error + tail.error + truncation);
    if !(integral > 0.0) || !integral.is_finite() {
        return Err(Error::numeric(format!("contour integral is not positive: {integral:e}"), None));
    }
    let log_z = prefactor(ctx, sr) + ctx.spectrum.b_n().ln() + integral.ln();
    Ok(LogZResult { log_z, method: LogZMethod::Quadrature, error_estimate: abs_err / integral })
}

/// Lowest height in `lo, 2 lo, 4 lo, ...` below `top` at which `log |H|` stays
/// non-positive along a sampled ray of the given length; `top` otherwise.
fn ray_height(d: &[f64], nb: f64, lo: f64, top: f64, length: f64) -> f64 {
    const SAMPLES: usize = 256;
    let fits = |s: f64| {
        (1..=SAMPLES).all(|j| {
            let x = length * FRAC_1_SQRT_2 * j as f64 / SAMPLES as f64;
            let spread: f64 = d.iter().map(|&di| (((di - x).powi(2) + (s + x).powi(2)) / (di * di)).ln()).sum();
            -nb * x - 0.25 * spread <= 0.0
        })
    };
    let mut s = lo;
    while s < top {
        if fits(s) {
            return s;
        }
        s *= 2.0;
    }
    top
}

/// Second-order expansion at the saddle. Asymptotically exact in the high-temperature
/// phase; in the low-temperature phase only `log Z / n` is accurate.
pub fn log_z_laplace(ctx: &SaddleContext<'_>, sr: &SaddleResult) -> Result<LogZResult> {
    let g2 = sr.g2_at_gamma;
    if !(g2 > 0.0) {
        return Err(Error::numeric(format!("G''(gamma) = {g2:e} is not positive"), None));
    }
    let n = ctx.spectrum.n() as f64;
    let b = ctx.spectrum.b_n();
    let log_z = prefactor(ctx, sr) + 0.5 * (b / n).ln() + 0.5 * (4.0 * PI * b / g2).ln();

    // First neglected term of the expansion: with v = 2/(n g2),
    // (n/16) g4 v^2 - (5 n^2/96) g3^2 v^3.
    let d = gaps(ctx, sr);
    let (s3, s4) = d.iter().fold((0.0, 0.0), |(a, c), di| (a + di.powi(-3), c + di.powi(-4)));
    let g3 = -2.0 * s3 / n;
    let g4 = 6.0 * s4 / n;
    let v = 2.0 / (n * g2);
    let correction = n / 16.0 * g4 * v * v - 5.0 * n * n / 96.0 * g3 * g3 * v * v * v;
    Ok(LogZResult { log_z, method: LogZMethod::Laplace, error_estimate: correction.abs() })
}

/// Direct Monte Carlo over the sphere of radius `sqrt(n)`.
pub fn log_z_sphere_mc<R: Rng + ?Sized>(m: &SampledMatrix, beta: f64, samples: usize, rng: &mut R) -> Result<LogZResult> {
    if samples == 0 {
        return Err(Error::input("sphere Monte Carlo needs at least one sample"));
    }
    let n = m.n();
    let scale = beta / m.b_n();
    if n == 1 {
        // the sphere is {-1, 1} and both points give the same weight
        return Ok(LogZResult { log_z: scale * m.get(0, 0), method: LogZMethod::SphereMC, error_estimate: 0.0 });
    }
    let upper = m.upper();
    let mut g = vec![0.0; n];
    let mut exponents = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut norm = 0.0;
        for gi in g.iter_mut() {
            *gi = rng.sample::<f64, _>(StandardNormal);
            norm += *gi * *gi;
        }
        let mut quad = 0.0;
        let mut k = 0;
        for i in 0..n {
            quad += upper[k] * g[i] * g[i];
            let mut off = 0.0;
            for j in (i + 1)..n {
                off += upper[k + j - i] * g[j];
            }
            quad += 2.0 * g[i] * off;
            k += n - i;
        }
        exponents.push(scale * n as f64 * quad / norm);
    }
    let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let count = samples as f64;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for e in &exponents {
        let w = (e - top).exp();
        sum += w;
        sum_sq += w * w;
    }
    let mean = sum / count;
    let var = if samples > 1 { (sum_sq / count - mean * mean).max(0.0) * count / (count - 1.0) } else { 0.0 };
    Ok(LogZResult {
        log_z: top + mean.ln(),
        method: LogZMethod::SphereMC,
        error_estimate: var.sqrt() / (mean * count.sqrt()),
    })
}

/// Closed form at `n = 2`: `β(λ1 + λ2)/b_n + log I0(β(λ1 - λ2)/b_n)`.
pub fn log_z_bessel_n2(lambda1: f64, lambda2: f64, beta: f64, b_n: f64) -> LogZResult {
    let log_z = beta * (lambda1 + lambda2) / b_n + ln_i0(beta * (lambda1 - lambda2) / b_n);
    LogZResult { log_z, method: LogZMethod::BesselN2, error_estimate: 0.0 }
}
