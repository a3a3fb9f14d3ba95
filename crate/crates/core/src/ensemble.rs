//! Heavy-tailed Wigner matrices and structural with-high-probability checks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::heavy_tail::TailLaw;
use crate::seed::stream;

/// Recipe for sampling a symmetric `n x n` matrix with i.i.d. upper-triangular entries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleSpec {
    pub n: usize,
    pub law: TailLaw,
    /// When present every entry is `X 1(|X| <= cutoff)`.
    pub truncation: Option<f64>,
}

impl EnsembleSpec {
    pub fn new(n: usize, law: TailLaw) -> Result<Self> {
        Self::with_truncation(n, law, None)
    }

    pub fn with_truncation(n: usize, law: TailLaw, truncation: Option<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("matrix dimension must be at least 1"));
        }
        if let Some(c) = truncation {
            if !(c > 0.0) {
                return Err(Error::input(format!("truncation cutoff must be positive, got {c}")));
            }
        }
        Ok(Self { n, law, truncation })
    }
}

/// One realization; only the upper triangle (`i <= j`, row-major) is stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledMatrix {
    n: usize,
    upper: Vec<f64>,
    b_n: f64,
    seed: u64,
}

#[inline]
fn tri_len(n: usize) -> usize {
    n * (n + 1) / 2
}

impl SampledMatrix {
    /// Wraps an explicit upper triangle of length `n (n + 1) / 2`.
    pub fn from_upper(n: usize, upper: Vec<f64>, b_n: f64, seed: u64) -> Result<Self> {
        if n == 0 || upper.len() != tri_len(n) {
            return Err(Error::input(format!(
                "upper triangle of a {n}x{n} matrix needs {} entries, got {}",
                tri_len(n),
                upper.len()
            )));
        }
        if !(b_n > 0.0) {
            return Err(Error::input("b_n must be positive"));
        }
        Ok(Self { n, upper, b_n, seed })
    }

    /// Builds a matrix from `f(i, j)` evaluated for `i <= j`.
    pub fn from_fn(n: usize, b_n: f64, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut upper = Vec::with_capacity(tri_len(n));
        for i in 0..n {
            for j in i..n {
                upper.push(f(i, j));
            }
        }
        Self::from_upper(n, upper, b_n, 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b_n(&self) -> f64 {
        self.b_n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Entry `M_ij` for any `i, j` (symmetry is implicit).
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        // row r starts after sum_{k<r} (n - k) entries
        self.upper[r * (2 * self.n + 1 - r) / 2 + (c - r)]
    }

    /// Row-major dense copy of the full symmetric matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut dense = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                let v = self.upper[k];
                dense[i * n + j] = v;
                dense[j * n + i] = v;
                k += 1;
            }
        }
        dense
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `sum_{i,j} M_ij^2`, counting off-diagonal entries twice.
    pub fn frobenius_sq(&self) -> f64 {
        let mut s = 0.0;
        let mut k = 0;
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.upper[k];
                s += if i == j { v * v } else { 2.0 * v * v };
                k += 1;
            }
        }
        s
    }
}

/// Draws `n (n + 1) / 2` i.i.d. entries in row-major upper-triangular order from
/// the stream seeded with `seed`, truncating if the spec asks for it.
pub fn sample_matrix(spec: &EnsembleSpec, seed: u64) -> Result<SampledMatrix> {
    let b_n = spec.law.normalizers(spec.n)?.b_n;
    let mut rng = stream(seed);
    let upper = (0..tri_len(spec.n))
        .map(|_| {
            let x = spec.law.sample(&mut rng);
            match spec.truncation {
                Some(c) if x.abs() > c => 0.0,
                _ => x,
            }
        })
        .collect();
    Ok(SampledMatrix { n: spec.n, upper, b_n, seed })
}

pub fn max_abs_entry(m: &SampledMatrix) -> f64 {
    m.upper.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

/// Per-condition outcome of the structural checks; `true` means the condition holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WhpReport {
    /// all `|M_ii| <= b^{11/20}`
    pub small_diagonal: bool,
    /// every `|M_ij| <= b^{99/100}` or `|M_ii| + |M_jj| <= b^{1/10}`
    pub large_entries_off_small_diagonal: bool,
    /// no row has two entries above `b^{1/2 + delta}`
    pub single_large_entry_per_row: bool,
    /// every row's dominant entry is below `b^{1/2 + eps}` or the rest of the row sums below it
    pub dominant_entry_isolated: bool,
}

impl WhpReport {
    pub fn all(&self) -> bool {
        self.small_diagonal
            && self.large_entries_off_small_diagonal
            && self.single_large_entry_per_row
            && self.dominant_entry_isolated
    }

    /// Compact `0/1` encoding in field order, e.g. `"1101"`.
    pub fn flags(&self) -> String {
        [
            self.small_diagonal,
            self.large_entries_off_small_diagonal,
            self.single_large_entry_per_row,
            self.dominant_entry_isolated,
        ]
        .iter()
        .map(|&f| if f { '1' } else { '0' })
        .collect()
    }
}

pub fn whp_diagnostics(m: &SampledMatrix, delta: f64, eps: f64) -> WhpReport {
    let n = m.n;
    let b = m.b_n;
    let diag_cap = b.powf(11.0 / 20.0);
    let big = b.powf(0.99);
    let small_pair = b.powf(0.1);
    let row_cap = b.powf(0.5 + delta);
    let dom_cap = b.powf(0.5 + eps);

    let small_diagonal = (0..n).all(|i| m.get(i, i).abs() <= diag_cap);

    let mut large_entries_off_small_diagonal = true;
    'outer: for i in 0..n {
        for j in i..n {
            if m.get(i, j).abs() > big && m.get(i, i).abs() + m.get(j, j).abs() > small_pair {
                large_entries_off_small_diagonal = false;
                break 'outer;
            }
        }
    }

    let mut single_large_entry_per_row = true;
    let mut dominant_entry_isolated = true;
    for i in 0..n {
        let mut count = 0;
        let mut arg = 0;
        let mut top = -1.0;
        for j in 0..n {
            let v = m.get(i, j);
            if v.abs() > row_cap {
                count += 1;
            }
            if v.abs() > top {
                top = v.abs();
                arg = j;
            }
        }
        if count >= 2 {
            single_large_entry_per_row = false;
        }
        let rest: f64 = (0..n).filter(|&j| j != arg).map(|j| m.get(i, j)).sum();
        if !(top < dom_cap || rest.abs() < dom_cap) {
            dominant_entry_isolated = false;
        }
    }

    WhpReport { small_diagonal, large_entries_off_small_diagonal, single_large_entry_per_row, dominant_entry_isolated }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heavy_tail::SlowVariation;

    fn pareto_spec(n: usize, alpha: f64) -> EnsembleSpec {
        EnsembleSpec::new(n, TailLaw::pareto(alpha).unwrap()).unwrap()
    }

    #[test]
    fn triangular_indexing_matches_dense() {
        let m = SampledMatrix::from_fn(5, 1.0, |i, j| (10 * i + j) as f64).unwrap();
        let d = m.to_dense();
        for i in 0..5 {
            for j in 0..5 {
                let (r, c) = if i <= j { (i, j) } else { (j, i) };
                assert_eq!(m.get(i, j), (10 * r + c) as f64);
                assert_eq!(d[i * 5 + j], d[j * 5 + i]);
                assert_eq!(d[i * 5 + j], m.get(i, j));
            }
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let law = TailLaw::pareto(1.0).unwrap();
        assert!(EnsembleSpec::new(0, law).is_err());
        assert!(EnsembleSpec::with_truncation(3, law, Some(0.0)).is_err());
        assert!(SampledMatrix::from_upper(3, vec![0.0; 5], 1.0, 0).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = pareto_spec(40, 0.8);
        let a = sample_matrix(&spec, 99).unwrap();
        let b = sample_matrix(&spec, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.upper().len(), 40 * 41 / 2);
        assert_ne!(a, sample_matrix(&spec, 100).unwrap());
        assert_eq!(a.b_n(), spec.law.normalizers(40).unwrap().b_n);
        let d = a.to_dense();
        for i in 0..40 {
            for j in 0..40 {
                assert_eq!(d[i * 40 + j].to_bits(), d[j * 40 + i].to_bits());
            }
        }
    }

    #[test]
    fn truncation_bounds_entries() {
        let law = TailLaw::pareto(0.6).unwrap();
        let spec = EnsembleSpec::with_truncation(60, law, Some(25.0)).unwrap();
        let m = sample_matrix(&spec, 3).unwrap();
        assert!(m.upper().iter().all(|v| v.abs() <= 25.0));
        assert!(m.upper().iter().any(|&v| v == 0.0));
    }

    #[test]
    fn max_abs_entry_cases() {
        let zero = SampledMatrix::from_fn(4, 1.0, |_, _| 0.0).unwrap();
        assert_eq!(max_abs_entry(&zero), 0.0);
        let spike = SampledMatrix::from_fn(4, 1.0, |i, j| if (i, j) == (0, 1) { -7.5 } else { 0.0 }).unwrap();
        assert_eq!(max_abs_entry(&spike), 7.5);
        let m = sample_matrix(&pareto_spec(30, 1.0), 8).unwrap();
        let d = m.to_dense();
        let brute = d.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert_eq!(max_abs_entry(&m), brute);
    }

    #[test]
    fn largest_entry_exceedance_matches_exact_law() {
        let spec = pareto_spec(100, 1.0);
        let b = spec.law.normalizers(100).unwrap().b_n;
        let reps = 200;
        let hits = (0..reps)
            .filter(|&r| max_abs_entry(&sample_matrix(&spec, 1000 + r as u64).unwrap()) > 0.5 * b)
            .count();
        let entries = (100 * 101 / 2) as f64;
        let p = 1.0 - (1.0 - spec.law.tail(0.5 * b).unwrap()).powf(entries);
        let sigma = (reps as f64 * p * (1.0 - p)).sqrt();
        assert!((hits as f64 - reps as f64 * p).abs() <= 3.0 * sigma, "hits {hits}, expected {}", reps as f64 * p);
    }

    #[test]
    fn zero_matrix_passes_every_check() {
        let zero = SampledMatrix::from_fn(10, 1e4, |_, _| 0.0).unwrap();
        let r = whp_diagnostics(&zero, 0.1, 0.1);
        assert!(r.all());
        assert_eq!(r.flags(), "1111");
    }

    #[test]
    fn two_large_entries_in_one_row_fail_row_check() {
        let b: f64 = 1e8;
        let v = b.powf(0.9);
        let m = SampledMatrix::from_fn(6, b, |i, j| if i == 0 && (j == 2 || j == 4) { v } else { 0.0 }).unwrap();
        let r = whp_diagnostics(&m, 0.1, 0.1);
        assert!(!r.single_large_entry_per_row);
        assert!(r.small_diagonal);
    }

    #[test]
    fn diagonal_and_dominance_counterexamples() {
        let b: f64 = 1e8;
        let m = SampledMatrix::from_fn(4, b, |i, j| if i == j && i == 2 { b.powf(0.6) } else { 0.0 }).unwrap();
        assert!(!whp_diagnostics(&m, 0.1, 0.1).small_diagonal);

        // dominant entry and a large remainder in the same row
        let big = b.powf(0.7);
        let m = SampledMatrix::from_fn(5, b, |i, j| match (i, j) {
            (0, 1) => 2.0 * big,
            (0, 2) | (0, 3) => big,
            _ => 0.0,
        })
        .unwrap();
        assert!(!whp_diagnostics(&m, 0.5, 0.1).dominant_entry_isolated);
    }

    #[test]
    fn polylog_law_samples() {
        let law = TailLaw::new(1.2, SlowVariation::PolyLog { p: 1.0 }, 0.5).unwrap();
        let m = sample_matrix(&EnsembleSpec::new(20, law).unwrap(), 4).unwrap();
        assert!(m.upper().iter().all(|v| v.abs() >= law.u0()));
    }
}
