//! Empirical distribution functions and the Kolmogorov–Smirnov distance.

use crate::error::{Error, Result};

/// Empirical CDF backed by a sorted sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    /// Builds the ECDF; NaN values are rejected.
    pub fn new(mut sample: Vec<f64>) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::input("empty sample"));
        }
        if sample.iter().any(|x| x.is_nan()) {
            return Err(Error::input("sample contains NaN"));
        }
        sample.sort_by(f64::total_cmp);
        Ok(Self { sorted: sample })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// P(X <= x).
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// P(X < x).
    pub fn eval_left(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v < x) as f64 / self.len() as f64
    }
}

/// One side of a KS comparison.
pub enum Dist<'a> {
    Empirical(&'a Ecdf),
    Analytic(&'a dyn Fn(f64) -> f64),
}

/// Sup-norm distance between two distribution functions, at least one empirical.
///
/// The supremum is attained at a jump of a step function, so both one-sided
/// limits are evaluated at every jump point of every empirical side.
pub fn ks_distance(a: Dist<'_>, b: Dist<'_>) -> Result<f64> {
    match (a, b) {
        (Dist::Empirical(x), Dist::Empirical(y)) => Ok(ks_two_sample(x, y)),
        (Dist::Empirical(x), Dist::Analytic(f)) | (Dist::Analytic(f), Dist::Empirical(x)) => {
            Ok(ks_one_sample(x, f))
        }
        (Dist::Analytic(_), Dist::Analytic(_)) => {
            Err(Error::input("KS distance needs at least one empirical distribution"))
        }
    }
}

pub fn ks_one_sample(e: &Ecdf, cdf: impl Fn(f64) -> f64) -> f64 {
    let n = e.len() as f64;
    let xs = e.sorted();
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max((j as f64 / n - f).abs());
        i = j;
    }
    d.min(1.0)
}

pub fn ks_two_sample(a: &Ecdf, b: &Ecdf) -> f64 {
    let (xs, ys) = (a.sorted(), b.sorted());
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() || j < ys.len() {
        let x = match (xs.get(i), ys.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample mean and its standard error (n - 1 denominator).
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = mean(xs);
    if xs.len() < 2 {
        return (m, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Binomial proportion and its standard error.
pub fn proportion(successes: usize, n: usize) -> (f64, f64) {
    let p = successes as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
        let e = Ecdf::new(sample.to_vec()).unwrap();
        let mut d: f64 = 0.0;
        for &x in sample {
            d = d.max((e.eval(x) - cdf(x)).abs());
            d = d.max((e.eval_left(x) - cdf(x)).abs());
        }
        d
    }

    #[test]
    fn identical_and_disjoint_samples() {
        let a = Ecdf::new(vec![0.3, 1.0, 2.0]).unwrap();
        assert_eq!(ks_distance(Dist::Empirical(&a), Dist::Empirical(&a)).unwrap(), 0.0);
        let z = Ecdf::new(vec![0.0]).unwrap();
        let o = Ecdf::new(vec![1.0]).unwrap();
        assert_eq!(ks_distance(Dist::Empirical(&z), Dist::Empirical(&o)).unwrap(), 1.0);
    }

    #[test]
    fn three_points_against_uniform_on_zero_four() {
        let sample = [1.0, 2.0, 3.0];
        let f = |x: f64| (x / 4.0).clamp(0.0, 1.0);
        let expected = brute_one_sample(&sample, f);
        assert!((expected - 0.25).abs() < 1e-15);
        let e = Ecdf::new(sample.to_vec()).unwrap();
        let d = ks_distance(Dist::Empirical(&e), Dist::Analytic(&f)).unwrap();
        assert!((d - expected).abs() < 1e-15);
    }

    #[test]
    fn empty_sample_is_an_input_error() {
        assert!(matches!(Ecdf::new(vec![]), Err(Error::Input(_))));
    }

    #[test]
    fn two_analytic_sides_rejected() {
        let f = |x: f64| x;
        assert!(ks_distance(Dist::Analytic(&f), Dist::Analytic(&f)).is_err());
    }

    #[test]
    fn median_and_proportion() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let (p, se) = proportion(25, 100);
        assert_eq!(p, 0.25);
        assert!((se - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn two_sample_matches_brute_force(
            a in proptest::collection::vec(-5i32..5, 1..30),
            b in proptest::collection::vec(-5i32..5, 1..30),
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let ea = Ecdf::new(a.clone()).unwrap();
            let eb = Ecdf::new(b.clone()).unwrap();
            let mut brute: f64 = 0.0;
            for &x in a.iter().chain(b.iter()) {
                brute = brute.max((ea.eval(x) - eb.eval(x)).abs());
                brute = brute.max((ea.eval_left(x) - eb.eval_left(x)).abs());
            }
            let d = ks_two_sample(&ea, &eb);
            prop_assert!((d - brute).abs() < 1e-15);
            prop_assert!((0.0..=1.0).contains(&d));
        }

        #[test]
        fn one_sample_matches_brute_force(a in proptest::collection::vec(0.0f64..4.0, 1..40)) {
            let f = |x: f64| (x / 4.0).clamp(0.0, 1.0);
            let e = Ecdf::new(a.clone()).unwrap();
            prop_assert!((ks_one_sample(&e, f) - brute_one_sample(&a, f)).abs() < 1e-15);
        }
    }
}
