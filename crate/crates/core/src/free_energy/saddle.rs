//! The contour exponent `G`, its critical point and the phase split.
//!
//! All quantities are rescaled: with `w = z / b_n` and `mu_i = lambda_i / b_n`,
//!
//! ```text
//! G(b_n w) = b_n [2 beta w - (1/n) sum_i log(w - mu_i)] - b_n log b_n
//! ```
//!
//! and `g_value(.., k)` returns `G^{(k)}(b_n w) b_n^{k-1}` without the constant
//! `-log b_n` for `k = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::Spectrum;

/// Residual bound every accepted saddle point must satisfy (rescaled units).
pub const SADDLE_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    /// `lambda_1 < b_n / (2 beta)`
    F1,
    /// `lambda_1 >= b_n / (2 beta)`
    F2,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::F1 => "F1",
            Phase::F2 => "F2",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SaddleContext<'a> {
    pub spectrum: &'a Spectrum,
    pub beta: f64,
}

impl<'a> SaddleContext<'a> {
    pub fn new(spectrum: &'a Spectrum, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::domain(format!("beta must be positive, got {beta}")));
        }
        Ok(Self { spectrum, beta })
    }

    fn n(&self) -> f64 {
        self.spectrum.n() as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SaddleResult {
    /// Critical point in raw units, `gamma > lambda_1`.
    pub gamma: f64,
    /// `gamma / b_n`.
    pub w: f64,
    /// `(gamma - lambda_1) / b_n`, carried separately to keep full relative precision.
    pub gap: f64,
    /// Rescaled `G(gamma)`: `2 beta w - (1/n) sum log(w - mu_i)`.
    pub g_at_gamma: f64,
    /// Rescaled `G''(gamma)`, i.e. `b_n G''(gamma) = (1/n) sum (w - mu_i)^{-2}`.
    pub g2_at_gamma: f64,
    /// `|G'(gamma)|` in rescaled units.
    pub residual: f64,
    pub phase: Phase,
    /// `n (2 beta gamma / b_n - 1)`.
    pub x_n: f64,
    /// `gamma - lambda_1` in raw units.
    pub stick_gap: f64,
    /// Sign check of `G'` at the analytic bracket ends (`< 0` at the left, `> 0` at the right).
    pub bracket_valid: bool,
}

/// `G^{(k)}(b_n w) b_n^{k-1}` for `k` in `0..=4`; the principal branch of `log` is used for `k = 0`.
pub fn g_value(ctx: &SaddleContext<'_>, w: Complex64, k: usize) -> Result<Complex64> {
    if k > 4 {
        return Err(Error::domain(format!("derivative order must be at most 4, got {k}")));
    }
    let mu = ctx.spectrum.mu();
    if w.im == 0.0 && mu.iter().any(|&m| m == w.re) {
        return Err(Error::Pole(w.re));
    }
    let n = ctx.n();
    if k == 0 {
        let s: Complex64 = mu.iter().map(|&m| (w - m).ln()).sum();
        return Ok(2.0 * ctx.beta * w - s / n);
    }
    let s: Complex64 = mu.iter().map(|&m| (w - m).powi(-(k as i32))).sum();
    let factorial = (1..k).product::<usize>() as f64;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let lead = if k == 1 { 2.0 * ctx.beta } else { 0.0 };
    Ok(lead + sign * factorial * s / n)
}

/// `F1` iff `lambda_1 < b_n / (2 beta)`; equality goes to `F2`.
pub fn classify_phase(s: &Spectrum, beta: f64) -> Phase {
    if s.lambda1() < s.b_n() / (2.0 * beta) {
        Phase::F1
    } else {
        Phase::F2
    }
}

// G'(w) as a function of the gap d = w - mu_1, with offsets delta_i = mu_1 - mu_i >= 0.
struct GapDerivative<'a> {
    two_beta: f64,
    inv_n: f64,
    offsets: &'a [f64],
}

impl GapDerivative<'_> {
    fn eval(&self, d: f64) -> (f64, f64) {
        let (mut s1, mut s2) = (0.0, 0.0);
        for &o in self.offsets {
            let r = 1.0 / (d + o);
            s1 += r;
            s2 += r * r;
        }
        (self.two_beta - self.inv_n * s1, self.inv_n * s2)
    }
}

/// Unique root of `G'` on `(lambda_1, ∞)`.
///
/// Works in the gap variable `d = (gamma - lambda_1) / b_n` on the bracket
/// `[1/(4 beta n), 1/beta]`: at the left end the top pole alone pushes `G'`
/// below `-2 beta`, at the right end every pole term is at most `beta`.
/// `G'` is increasing and concave in `d`, so Newton steps are kept inside the
/// shrinking bracket and bisection takes over whenever a step leaves it.
pub fn solve_gamma(ctx: &SaddleContext<'_>) -> Result<SaddleResult> {
    let s = ctx.spectrum;
    let beta = ctx.beta;
    let n = ctx.n();
    let mu = s.mu();
    let mu1 = mu[0];
    let offsets: Vec<f64> = mu.iter().map(|m| mu1 - m).collect();
    let f = GapDerivative { two_beta: 2.0 * beta, inv_n: 1.0 / n, offsets: &offsets };

    let mut lo = 1.0 / (4.0 * beta * n);
    let mut hi = 1.0 / beta;
    let f_lo = f.eval(lo).0;
    let f_hi = f.eval(hi).0;
    let bracket_valid = f_lo < 0.0 && f_hi > 0.0;

    let mut d = lo;
    let mut fd = f_lo;
    for _ in 0..400 {
        let (val, slope) = f.eval(d);
        fd = val;
        if val == 0.0 {
            break;
        }
        if val < 0.0 {
            lo = d;
        } else {
            hi = d;
        }
        let newton = d - val / slope;
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - d).abs() <= 4.0 * f64::EPSILON * d || hi - lo <= 4.0 * f64::EPSILON * hi {
            d = next;
            fd = f.eval(d).0;
            break;
        }
        d = next;
    }

    let residual = fd.abs();
    if residual > SADDLE_RESIDUAL_TOL {
        return Err(Error::numeric(format!("saddle residual {residual:e} above tolerance"), Some(d)));
    }

    let w = mu1 + d;
    let inv_n = 1.0 / n;
    let g_at_gamma = 2.0 * beta * w - inv_n * offsets.iter().map(|o| (d + o).ln()).sum::<f64>();
    let g2_at_gamma = inv_n * offsets.iter().map(|o| (d + o).powi(-2)).sum::<f64>();
    let b = s.b_n();
    Ok(SaddleResult {
        gamma: b * w,
        w,
        gap: d,
        g_at_gamma,
        g2_at_gamma,
        residual,
        phase: classify_phase(s, beta),
        x_n: n * (2.0 * beta * w - 1.0),
        stick_gap: b * d,
        bracket_valid,
    })
}

/// Rescaled derivative `b_n^{k-1} G^{(k)}(gamma)` evaluated at the saddle, computed from the gap.
pub fn saddle_derivative(ctx: &SaddleContext<'_>, sr: &SaddleResult, k: usize) -> Result<f64> {
    if !(1..=4).contains(&k) {
        return Err(Error::domain(format!("derivative order must lie in 1..=4, got {k}")));
    }
    let mu = ctx.spectrum.mu();
    let mu1 = mu[0];
    let s: f64 = mu.iter().map(|m| (sr.gap + (mu1 - m)).powi(-(k as i32))).sum();
    let factorial = (1..k).product::<usize>() as f64;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let lead = if k == 1 { 2.0 * ctx.beta } else { 0.0 };
    Ok(lead + sign * factorial * s / ctx.n())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spectrum(eigs: &[f64], b: f64) -> Spectrum {
        Spectrum::new(eigs.to_vec(), b).unwrap()
    }

    #[test]
    fn g_value_examples() {
        let beta = 0.7;
        let zero = spectrum(&[0.0; 6], 1.0);
        let ctx = SaddleContext::new(&zero, beta).unwrap();
        let g1 = g_value(&ctx, Complex64::new(1.0 / (2.0 * beta), 0.0), 1).unwrap();
        assert!(g1.norm() < 1e-15);
        let g2 = g_value(&ctx, Complex64::new(1.0, 0.0), 2).unwrap();
        assert_relative_eq!(g2.re, 1.0, max_relative = 1e-15);

        let pair = spectrum(&[1.0, -1.0], 1.0);
        let ctx = SaddleContext::new(&pair, 0.5).unwrap();
        let g0 = g_value(&ctx, Complex64::new(2.0, 0.0), 0).unwrap();
        assert_relative_eq!(g0.re, 2.0 - 0.5 * 3f64.ln(), max_relative = 1e-15);
        assert_eq!(g0.im, 0.0);

        assert!(matches!(g_value(&ctx, Complex64::new(1.0, 0.0), 1), Err(Error::Pole(_))));
        assert!(g_value(&ctx, Complex64::new(3.0, 0.0), 5).is_err());
    }

    #[test]
    fn rescaled_representation_matches_raw_exponent() {
        // raw G(z) = 2 beta z - (b/n) sum log(z - lambda_i) against b [g0(z/b)] - b log b
        let b = 37.0;
        let eigs = [20.0, 3.0, -5.0, -11.0];
        let s = spectrum(&eigs, b);
        let ctx = SaddleContext::new(&s, 0.8).unwrap();
        let z = 31.0;
        let raw = 2.0 * 0.8 * z - (b / 4.0) * eigs.iter().map(|l| (z - l).ln()).sum::<f64>();
        let g0 = g_value(&ctx, Complex64::new(z / b, 0.0), 0).unwrap().re;
        assert_relative_eq!(b * g0 - b * b.ln(), raw, max_relative = 1e-13);
    }

    #[test]
    fn second_derivative_matches_finite_differences() {
        let s = spectrum(&[0.9, 0.2, -0.3, -1.1, 0.05], 1.0);
        let ctx = SaddleContext::new(&s, 0.6).unwrap();
        for &w in &[1.5, 2.0, 3.7] {
            for k in 1..4 {
                let h = 1e-4;
                let up = g_value(&ctx, Complex64::new(w + h, 0.0), k).unwrap().re;
                let dn = g_value(&ctx, Complex64::new(w - h, 0.0), k).unwrap().re;
                let next = g_value(&ctx, Complex64::new(w, 0.0), k + 1).unwrap().re;
                assert_relative_eq!((up - dn) / (2.0 * h), next, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn solve_gamma_closed_forms() {
        let one = spectrum(&[0.0], 1.0);
        let r = solve_gamma(&SaddleContext::new(&one, 0.5).unwrap()).unwrap();
        assert_relative_eq!(r.gamma, 1.0, max_relative = 1e-14);

        let pair = spectrum(&[1.0, -1.0], 1.0);
        let r = solve_gamma(&SaddleContext::new(&pair, 0.5).unwrap()).unwrap();
        assert_relative_eq!(r.gamma, (1.0 + 5f64.sqrt()) / 2.0, max_relative = 1e-14);
        assert!(r.gamma > 1.0);
        assert!(r.residual <= SADDLE_RESIDUAL_TOL);
        assert!(r.bracket_valid);
        assert_eq!(r.phase, Phase::F2);
    }

    #[test]
    fn phase_classification() {
        let beta = 0.5;
        let b = 10.0;
        let edge = b / (2.0 * beta);
        assert_eq!(classify_phase(&spectrum(&[0.9 * edge, 0.0], b), beta), Phase::F1);
        assert_eq!(classify_phase(&spectrum(&[1.1 * edge, 0.0], b), beta), Phase::F2);
        assert_eq!(classify_phase(&spectrum(&[edge, 0.0], b), beta), Phase::F2);
    }

    #[test]
    fn near_pole_saddle_in_low_temperature_phase() {
        // large n with an isolated top eigenvalue: the root sits ~1/n from the pole
        let n = 2000;
        let mut mu = vec![0.0; n];
        for (i, m) in mu.iter_mut().enumerate() {
            *m = ((i as f64) / n as f64 - 0.5) * 0.01;
        }
        mu[0] = 3.0;
        let s = Spectrum::from_rescaled(mu, 1e9).unwrap();
        let r = solve_gamma(&SaddleContext::new(&s, 1.0).unwrap()).unwrap();
        assert!(r.gap > 0.0 && r.gap < 1e-2);
        assert!(r.residual <= 1e-12);
        assert!(r.bracket_valid);
    }

    proptest! {
        #[test]
        fn saddle_postconditions(mu in proptest::collection::vec(-3.0f64..3.0, 1..40), beta in 0.05f64..4.0, logb in -3.0f64..20.0) {
            let b = logb.exp();
            let s = Spectrum::from_rescaled(mu, b).unwrap();
            let ctx = SaddleContext::new(&s, beta).unwrap();
            let r = solve_gamma(&ctx).unwrap();
            prop_assert!(r.bracket_valid);
            prop_assert!(r.gap > 0.0);
            prop_assert!(r.residual <= SADDLE_RESIDUAL_TOL);
            let check = g_value(&ctx, Complex64::new(r.w, 0.0), 1).unwrap().re;
            prop_assert!(check.abs() <= 1e-8 * (1.0 + 1.0 / (s.n() as f64 * r.gap)));
            prop_assert_eq!(r.phase == Phase::F1, s.mu1() < 1.0 / (2.0 * beta));
        }
    }
}
