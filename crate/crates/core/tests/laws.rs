//! Statistical laws on moderately large runs: extreme-value proximity, trace
//! statistics, truncated moments, structural flags, saddle derivative scaling and
//! agreement of the log Z evaluators on sampled spectra.

use levy_ssk::ensemble::{max_abs_entry, sample_matrix, whp_diagnostics, EnsembleSpec};
use levy_ssk::experiments::{run_trials, summarize, ExperimentConfig, ExperimentKind};
use levy_ssk::free_energy::{
    log_z_laplace, log_z_quadrature, log_z_sphere_mc, saddle_derivative, solve_gamma, Phase, SaddleContext,
};
use levy_ssk::heavy_tail::TailLaw;
use levy_ssk::seed::{derive_seed, stream};
use levy_ssk::spectra::eigen_decompose;
use levy_ssk::stats::{ks_two_sample, mean_and_se, median, Ecdf};

const SEED: u64 = 0x5eed_1a75;

#[test]
fn largest_eigenvalues_track_the_largest_entry() {
    let law = TailLaw::pareto(0.5).unwrap();
    let spec = EnsembleSpec::new(300, law).unwrap();
    let (mut top, mut bottom) = (0, 0);
    for t in 0..500 {
        let m = sample_matrix(&spec, derive_seed(SEED, t)).unwrap();
        let s = eigen_decompose(&m).unwrap();
        let big = max_abs_entry(&m);
        if (s.eigs()[0] - big).abs() / big <= 0.2 {
            top += 1;
        }
        if (s.eigs()[299].abs() / big - 1.0).abs() <= 0.2 {
            bottom += 1;
        }
    }
    assert!(top >= 450, "lambda_1 close to the largest entry in {top}/500 trials");
    assert!(bottom >= 450, "|lambda_n| close to the largest entry in {bottom}/500 trials");
}

#[test]
fn trace_drifts_to_zero_and_sum_of_squares_stabilises() {
    let cfg = ExperimentConfig::new(ExperimentKind::TraceDiagnostics, 1.0, 0.5, vec![150, 300], 500, SEED);
    let records = run_trials(&cfg, 0).unwrap();
    let report = summarize(&cfg, &records).unwrap();
    for name in ["trace_median_decreasing[n=150->300]", "trace_ks[n=150->300]"] {
        let c = report.check(name).unwrap_or_else(|| panic!("missing {name}"));
        assert!(c.pass, "{name}: {} vs {}", c.value, c.threshold);
    }
}

#[test]
fn truncated_second_moment_of_the_ensemble() {
    // cutoff b_n at beta = 1/2; the per-matrix sum of Y_ij^2 / b_n^2 over i <= j
    // has mean alpha / (2 - alpha) + O(b_n^{alpha - 2})
    let alpha = 1.0;
    let n = 500;
    let law = TailLaw::pareto(alpha).unwrap();
    let b = law.normalizers(n).unwrap().b_n;
    let spec = EnsembleSpec::with_truncation(n, law, Some(b)).unwrap();
    let sums: Vec<f64> = (0..400)
        .map(|t| {
            let m = sample_matrix(&spec, derive_seed(SEED ^ 0xabc, t)).unwrap();
            m.upper().iter().map(|y| (y / b).powi(2)).sum()
        })
        .collect();
    let exact = alpha / (2.0 - alpha) + (1.0 - 2.0 / (2.0 - alpha)) * b.powf(alpha - 2.0);
    let (m, se) = mean_and_se(&sums);
    assert!((exact - alpha / (2.0 - alpha)).abs() < 1e-4);
    assert!((m - exact).abs() <= 4.0 * se, "mean {m} ± {se}, exact {exact}");
    assert!((m - exact).abs() <= 0.1 * exact, "mean {m}, exact {exact}");
}

#[test]
fn structural_flags_against_exact_and_baseline_rates() {
    let alpha = 0.5;
    let n = 200;
    let reps = 500;
    let law = TailLaw::pareto(alpha).unwrap();
    let spec = EnsembleSpec::new(n, law).unwrap();
    let b = law.normalizers(n).unwrap().b_n;
    let mut counts = [0usize; 4];
    for t in 0..reps {
        let m = sample_matrix(&spec, derive_seed(SEED ^ 0xf1a9, t)).unwrap();
        let r = whp_diagnostics(&m, 0.1, 0.1);
        for (c, f) in counts.iter_mut().zip([
            r.small_diagonal,
            r.large_entries_off_small_diagonal,
            r.single_large_entry_per_row,
            r.dominant_entry_isolated,
        ]) {
            *c += f as usize;
        }
    }
    let rate = |c: usize| c as f64 / reps as f64;

    // diagonal flag: P(all |M_ii| <= b^{11/20}) = (1 - b^{-11 alpha / 20})^n exactly
    let p = (1.0 - b.powf(-11.0 * alpha / 20.0)).powi(n as i32);
    let sd = (p * (1.0 - p) / reps as f64).sqrt();
    assert!((rate(counts[0]) - p).abs() <= 4.0 * sd, "diagonal flag rate {} vs exact {p}", rate(counts[0]));

    // The remaining conditions hold only asymptotically and are far from typical at
    // this size: each row has about 0.52 entries above b^{0.6}, so some row has two
    // with probability 1 - 1e-9 and (c) and (d) essentially never hold. Observed rates are pinned as regression baselines.
    assert!((rate(counts[1]) - 0.438).abs() <= 0.09, "flag (b) rate {}", rate(counts[1]));
    assert!(rate(counts[2]) <= 0.02, "flag (c) rate {}", rate(counts[2]));
    assert!(rate(counts[3]) <= 0.02, "flag (d) rate {}", rate(counts[3]));
}

#[test]
fn saddle_derivatives_scale_with_the_phase() {
    let law = TailLaw::pareto(1.0).unwrap();
    let beta = 0.5;
    // normalized derivatives: b^{k-1} G^(k) on F1, (b/n)^{k-1} G^(k) on F2
    let collect = |n: usize| {
        let spec = EnsembleSpec::new(n, law).unwrap();
        let mut f1 = vec![Vec::new(); 3];
        let mut f2 = vec![Vec::new(); 3];
        for t in 0..300 {
            let m = sample_matrix(&spec, derive_seed(SEED ^ n as u64, t)).unwrap();
            let s = eigen_decompose(&m).unwrap();
            let ctx = SaddleContext::new(&s, beta).unwrap();
            let sr = solve_gamma(&ctx).unwrap();
            for k in 2..=4 {
                let d = saddle_derivative(&ctx, &sr, k).unwrap();
                match sr.phase {
                    Phase::F1 => f1[k - 2].push(d.abs()),
                    Phase::F2 => f2[k - 2].push(d.abs() / (n as f64).powi(k as i32 - 1)),
                }
            }
        }
        (f1, f2)
    };
    let (a1, a2) = collect(150);
    let (b1, b2) = collect(300);
    for k in 0..3 {
        let (m150, m300) = (median(&a1[k]), median(&b1[k]));
        assert!(m300 <= 2.0 * m150 && m300 >= 0.5 * m150, "F1 k={}: {m150} -> {m300}", k + 2);
        let (m150, m300) = (median(&a2[k]), median(&b2[k]));
        let slack = 2.0f64.powf(0.05 * (k + 2) as f64) * 2.0;
        assert!(m300 <= slack * m150 && m300 >= m150 / slack, "F2 k={}: {m150} -> {m300}", k + 2);
        assert!(m300 > 0.0);
    }
}

#[test]
fn quadrature_agrees_with_sphere_monte_carlo_at_n10() {
    let spec = EnsembleSpec::new(10, TailLaw::pareto(1.5).unwrap()).unwrap();
    let mut agree = 0;
    for t in 0..10 {
        let m = sample_matrix(&spec, derive_seed(SEED, 900 + t)).unwrap();
        let s = eigen_decompose(&m).unwrap();
        let ctx = SaddleContext::new(&s, 0.8).unwrap();
        let q = solve_gamma(&ctx).and_then(|sr| log_z_quadrature(&ctx, &sr)).unwrap();
        let mc = log_z_sphere_mc(&m, 0.8, 200_000, &mut stream(derive_seed(SEED, 950 + t))).unwrap();
        if (q.log_z - mc.log_z).abs() <= 3.0 * mc.error_estimate {
            agree += 1;
        }
    }
    assert!(agree >= 9, "{agree}/10 within 3 standard errors");
}

#[test]
fn laplace_tracks_quadrature_on_large_spectra() {
    let law = TailLaw::pareto(1.0).unwrap();
    let spec = EnsembleSpec::new(400, law).unwrap();
    let (mut f1_gaps, mut f2_gaps) = (Vec::new(), Vec::new());
    for t in 0..40 {
        let m = sample_matrix(&spec, derive_seed(SEED ^ 0x1a91, t)).unwrap();
        let s = eigen_decompose(&m).unwrap();
        for (beta, out) in [(0.4, &mut f1_gaps), (1.0, &mut f2_gaps)] {
            let ctx = SaddleContext::new(&s, beta).unwrap();
            let sr = solve_gamma(&ctx).unwrap();
            let gap = (log_z_laplace(&ctx, &sr).unwrap().log_z - log_z_quadrature(&ctx, &sr).unwrap().log_z).abs();
            match (beta < 0.5, sr.phase) {
                (true, Phase::F1) => out.push(gap),
                (false, Phase::F2) => out.push(gap / 400.0),
                _ => {}
            }
        }
    }
    assert!(!f1_gaps.is_empty() && !f2_gaps.is_empty());
    assert!(median(&f1_gaps) <= 0.05, "F1 median |laplace - quadrature| = {}", median(&f1_gaps));
    assert!(median(&f2_gaps) <= 0.02, "F2 median |laplace - quadrature| / n = {}", median(&f2_gaps));
}

#[test]
fn saddle_location_settles_on_f1() {
    let cfg = ExperimentConfig::new(ExperimentKind::HighTempStability, 1.0, 0.4, vec![200, 400], 600, SEED);
    let records = run_trials(&cfg, 0).unwrap();
    let x = |n: usize| {
        Ecdf::new(records.iter().filter(|r| r.n == n && r.phase == Some(Phase::F1)).map(|r| r.x_n).collect()).unwrap()
    };
    let (a, b) = (x(200), x(400));
    assert!(a.len() >= 200 && b.len() >= 200);
    let d = ks_two_sample(&a, &b);
    assert!(d <= 0.12, "KS(X_n | F1) = {d}");
}
