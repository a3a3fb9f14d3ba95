//! Heavy-tailed entry laws `P(|X| > u) = L(u) u^{-alpha}` and their normalizing sequences.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};

/// Slowly varying factor `L` of the tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SlowVariation {
    /// `L = 1`: pure Pareto tail `min(1, u^{-alpha})`.
    Const,
    /// `L(u) = (log(e * max(u, 1)))^p`.
    PolyLog { p: f64 },
}

/// Law of a single matrix entry: symmetric-or-skewed sign times a heavy-tailed magnitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailLaw {
    alpha: f64,
    slow_variation: SlowVariation,
    theta: f64,
    u0: f64,
}

/// Normalizing sequences of a law at a given size `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Normalizers {
    pub n: usize,
    /// Matrix normalizer `inf{t : P(|X| > t) <= 2 / (n (n + 1))}`.
    pub b_n: f64,
    /// Row-sum normalizer `inf{x : P(|X| > x) <= 1 / n}`.
    pub a_n: f64,
    /// Centering `n E[X 1(|X| <= a_n)]`.
    pub c_n: f64,
}

// Exponent used for the L(x) exp(x^delta) monotonicity check.
const SLOW_VARIATION_DELTA: f64 = 0.1;

impl TailLaw {
    pub fn new(alpha: f64, slow_variation: SlowVariation, theta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::domain(format!("alpha must lie in (0, 2), got {alpha}")));
        }
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::domain(format!("theta must lie in [0, 1], got {theta}")));
        }
        let u0 = match slow_variation {
            SlowVariation::Const => 1.0,
            SlowVariation::PolyLog { p } => {
                if !p.is_finite() {
                    return Err(Error::domain("poly-log exponent must be finite"));
                }
                polylog_edge(alpha, p)
            }
        };
        let law = Self { alpha, slow_variation, theta, u0 };
        if let SlowVariation::PolyLog { p } = slow_variation {
            law.check_slow_variation(p)?;
        }
        Ok(law)
    }

    /// Symmetric pure Pareto law with exponent `alpha`.
    pub fn pareto(alpha: f64) -> Result<Self> {
        Self::new(alpha, SlowVariation::Const, 0.5)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn slow_variation(&self) -> SlowVariation {
        self.slow_variation
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Lower edge of the tail region: `tail(u) = 1` exactly for `u <= u0`.
    pub fn u0(&self) -> f64 {
        self.u0
    }

    fn raw_tail(&self, u: f64) -> f64 {
        match self.slow_variation {
            SlowVariation::Const => u.powf(-self.alpha),
            SlowVariation::PolyLog { p } => {
                let v = u.max(1.0);
                (1.0 + v.ln()).powf(p) * v.powf(-self.alpha)
            }
        }
    }

    fn check_slow_variation(&self, p: f64) -> Result<()> {
        let grid = |lo: f64, hi: f64, k: usize| {
            let (a, b) = (lo.ln(), hi.ln());
            (0..=k).map(move |i| (a + (b - a) * i as f64 / k as f64).exp())
        };
        let mut prev = f64::INFINITY;
        for u in grid(self.u0, self.u0 * 1e12, 400) {
            let t = self.tail_unchecked(u);
            if t > prev {
                return Err(Error::domain(format!("tail is not monotone near u = {u}")));
            }
            prev = t;
        }
        // log(L(x) e^{x^delta}) must increase for large x.
        let mut prev = f64::NEG_INFINITY;
        for x in grid(1e6, 1e100, 400) {
            let g = p * (1.0 + x.ln()).ln() + x.powf(SLOW_VARIATION_DELTA);
            if g < prev {
                return Err(Error::domain(format!(
                    "L(x) exp(x^{SLOW_VARIATION_DELTA}) is not increasing near x = {x:e}"
                )));
            }
            prev = g;
        }
        Ok(())
    }

    fn tail_unchecked(&self, u: f64) -> f64 {
        if u <= self.u0 {
            1.0
        } else {
            self.raw_tail(u).min(1.0)
        }
    }

    /// `P(|X| > u)`.
    pub fn tail(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::domain(format!("tail needs u >= 0, got {u}")));
        }
        Ok(self.tail_unchecked(u))
    }

    /// `inf{u : tail(u) <= q}`; for `q = 1` this returns the support edge `u0`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::domain(format!("quantile needs q in (0, 1], got {q}")));
        }
        Ok(self.quantile_unchecked(q))
    }

    fn quantile_unchecked(&self, q: f64) -> f64 {
        if q >= 1.0 {
            return self.u0;
        }
        match self.slow_variation {
            SlowVariation::Const => q.powf(-1.0 / self.alpha),
            SlowVariation::PolyLog { .. } => {
                // bisection on the monotone tail, in log coordinates
                let mut lo = self.u0;
                let mut hi = self.u0 * 2.0;
                while self.tail_unchecked(hi) > q {
                    lo = hi;
                    hi *= 2.0;
                }
                while hi > lo * (1.0 + 4.0 * f64::EPSILON) {
                    let mid = (lo * hi).sqrt();
                    let mid = if mid > lo && mid < hi { mid } else { 0.5 * (lo + hi) };
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.tail_unchecked(mid) > q {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            }
        }
    }

    /// Draws `X`: magnitude by inverse transform, then an independent sign that is
    /// positive with probability `theta`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // (0, 1]
        let u = 1.0 - rng.random::<f64>();
        let magnitude = self.quantile_unchecked(u);
        if rng.random_bool(self.theta) {
            magnitude
        } else {
            -magnitude
        }
    }

    /// `E[|X| 1(|X| <= a)] = ∫_0^a (tail(u) - tail(a)) du`.
    pub fn truncated_abs_mean(&self, a: f64) -> Result<f64> {
        if a <= self.u0 {
            return Ok(0.0);
        }
        let ta = self.tail_unchecked(a);
        match self.slow_variation {
            SlowVariation::Const => {
                let s = 1.0 - self.alpha;
                let body = if s.abs() < 1e-12 { a.ln() } else { (a.powf(s) - 1.0) / s };
                Ok(1.0 + body - a * ta)
            }
            SlowVariation::PolyLog { .. } => {
                let (lo, hi) = (self.u0.ln(), a.ln());
                let r = integrate(
                    |s| {
                        let u = s.exp();
                        self.tail_unchecked(u) * u
                    },
                    lo,
                    hi,
                    QuadOptions { rel_tol: 1e-8, abs_tol: 0.0, max_panels: 2000 },
                )?;
                Ok(self.u0 + r.value - a * ta)
            }
        }
    }

    pub fn normalizers(&self, n: usize) -> Result<Normalizers> {
        if n == 0 {
            return Err(Error::domain("normalizers need n >= 1"));
        }
        let nf = n as f64;
        let b_n = self.quantile_unchecked(2.0 / (nf * (nf + 1.0)));
        let a_n = self.quantile_unchecked(1.0 / nf);
        let c_n = if self.theta == 0.5 {
            0.0
        } else {
            nf * (2.0 * self.theta - 1.0) * self.truncated_abs_mean(a_n)?
        };
        Ok(Normalizers { n, b_n, a_n, c_n })
    }
}

// Point beyond which (1 + ln u)^p u^{-alpha} is decreasing and at most one.
fn polylog_edge(alpha: f64, p: f64) -> f64 {
    if p <= alpha {
        return 1.0;
    }
    let raw = |u: f64| p * (1.0 + u.ln()).ln() - alpha * u.ln();
    let peak = (p / alpha - 1.0).exp();
    let mut lo = peak;
    let mut hi = peak * 2.0;
    while raw(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if raw(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Fréchet distribution function `exp(-x^{-alpha})`, zero for `x <= 0`.
pub fn frechet_cdf(alpha: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-x.powf(-alpha)).exp()
    }
}

/// Tail of the low-temperature limit variable, supported on `(1/(2 beta), ∞)`:
/// `(1 - exp(-u^{-alpha})) / (1 - exp(-(2 beta)^alpha))`.
pub fn conditional_x_tail(alpha: f64, beta: f64, u: f64) -> Result<f64> {
    let edge = 1.0 / (2.0 * beta);
    if !(u > edge) {
        return Err(Error::domain(format!("conditional tail needs u > {edge}, got {u}")));
    }
    Ok((-u.powf(-alpha)).exp_m1() / (-(2.0 * beta).powf(alpha)).exp_m1())
}

/// Inverse of [`conditional_x_tail`]: the `u` with tail probability `p` in `(0, 1]`.
pub fn conditional_x_quantile(alpha: f64, beta: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain(format!("conditional quantile needs p in (0, 1], got {p}")));
    }
    let mass = -(-(2.0 * beta).powf(alpha)).exp_m1();
    Ok((-(-p * mass).ln_1p()).powf(-1.0 / alpha))
}
