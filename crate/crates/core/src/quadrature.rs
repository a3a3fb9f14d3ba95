//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and panel budget for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-8, abs_tol: 0.0, max_panels: 4000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kron += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kron * half;
    let error = ((kron - gauss) * half).abs();
    Panel { a, b, value, error }
}

/// Integrates `f` over the partition given by `breaks` (sorted, at least two points).
///
/// Panels are bisected in order of decreasing error estimate until the total
/// error drops below `max(abs_tol, rel_tol * |value|)`. Exhausting the panel
/// budget yields [`Error::Numeric`] carrying the partial value.
pub fn integrate_with_breaks<F>(mut f: F, breaks: &[f64], opts: QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    if breaks.len() < 2 {
        return Err(Error::input("quadrature needs at least one interval"));
    }
    let mut heap = BinaryHeap::with_capacity(2 * breaks.len());
    for w in breaks.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::input(format!("breakpoints not increasing: {} .. {}", w[0], w[1])));
        }
        heap.push(kronrod(&mut f, w[0], w[1]));
    }
    loop {
        let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::numeric("non-finite integrand", None));
        }
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target {
            return Ok(QuadResult { value, error, panels: heap.len() });
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::numeric(
                format!("quadrature did not converge within {} panels (error {error:e})", opts.max_panels),
                Some(value),
            ));
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision; accept what we have
            heap.push(Panel { error: 0.0, ..worst });
            continue;
        }
        heap.push(kronrod(&mut f, worst.a, mid));
        heap.push(kronrod(&mut f, mid, worst.b));
    }
}

pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    integrate_with_breaks(f, &[a, b], opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomials_up_to_degree_22_are_exact_on_one_panel() {
        let p = kronrod(&mut |x: f64| x.powi(22) + 3.0 * x.powi(7), -1.0, 1.0);
        assert_relative_eq!(p.value, 2.0 / 23.0, max_relative = 1e-14);
    }

    #[test]
    fn gauss_rule_is_exact_for_degree_13() {
        // K15 and G7 both integrate x^12 exactly, so the error estimate collapses.
        let p = kronrod(&mut |x: f64| x.powi(12), 0.0, 2.0);
        assert_relative_eq!(p.value, 2f64.powi(13) / 13.0, max_relative = 1e-14);
        assert!(p.error < 1e-10);
    }

    #[test]
    fn smooth_and_peaked_integrands() {
        let r = integrate(f64::exp, 0.0, 1.0, QuadOptions::default()).unwrap();
        assert_relative_eq!(r.value, std::f64::consts::E - 1.0, max_relative = 1e-12);

        let eps = 1e-4;
        let r = integrate(|x| eps / (x * x + eps * eps), -1.0, 1.0, QuadOptions { rel_tol: 1e-10, ..Default::default() })
            .unwrap();
        assert_relative_eq!(r.value, 2.0 * (1.0 / eps).atan(), max_relative = 1e-9);
    }

    #[test]
    fn oscillatory_integrand() {
        let r = integrate(|x| (50.0 * x).cos(), 0.0, 3.0, QuadOptions { rel_tol: 1e-12, ..Default::default() }).unwrap();
        assert_relative_eq!(r.value, (150.0f64).sin() / 50.0, max_relative = 1e-10);
    }

    #[test]
    fn budget_exhaustion_reports_partial() {
        let err = integrate(|x| (1.0 / x).sin(), 1e-9, 1.0, QuadOptions { rel_tol: 1e-14, abs_tol: 0.0, max_panels: 8 })
            .unwrap_err();
        match err {
            Error::Numeric { partial, .. } => assert!(partial.is_some()),
            other => panic!("unexpected {other:?}"),
        }
    }
}
