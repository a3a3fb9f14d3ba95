//! Command-line front end: argument parsing, file outputs and plots.

pub mod output;
pub mod plot;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::ensemble::{max_abs_entry, sample_matrix, whp_diagnostics, EnsembleSpec, SampledMatrix};
use crate::error::{Error, Result};
use crate::experiments::{
    high_temp_series, ok_at, pushforward_sample, run_experiment, ExperimentConfig, ExperimentKind, TrialRecord,
    PUSHFORWARD_STREAM,
};
use crate::free_energy::{
    log_z_bessel_n2, log_z_laplace, log_z_quadrature, log_z_sphere_mc, solve_gamma, Phase, SaddleContext,
};
use crate::heavy_tail::{frechet_cdf, SlowVariation, TailLaw};
use crate::seed::{derive_seed, stream};
use crate::spectra::{eigen_decompose, identity_errors, Spectrum};
use output::{load_config, summary_json, trials_csv, RunManifest, VERSION};
use plot::{ecdf_svg, histogram_svg, Series};

/// Environment variable consulted when `--threads` is absent.
pub const THREADS_ENV: &str = "LEVY_SSK_THREADS";

#[derive(Debug, Parser)]
#[command(name = "levy-ssk", version, about = "Heavy-tailed spherical SK model: spectra, free energy and Monte Carlo experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample one matrix and print its spectral summary.
    SampleSpectrum(SampleArgs),
    /// Evaluate log Z for one spectrum by every available method.
    FreeEnergy(FreeEnergyArgs),
    /// Run an experiment config and write trials CSV, summary JSON and optional plots.
    Experiment(ExperimentArgs),
    /// Partial sums of the mean and variance series.
    Series(SeriesArgs),
    /// Structural with-high-probability checks on one sampled matrix.
    Diagnostics(DiagnosticsArgs),
}

#[derive(Debug, Args)]
struct LawArgs {
    /// Tail exponent in (0, 2).
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Right-tail weight of the entries.
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    /// Use the poly-log slowly varying factor with this exponent.
    #[arg(long)]
    poly_log_p: Option<f64>,
}

impl LawArgs {
    fn law(&self) -> Result<TailLaw> {
        let sv = self.poly_log_p.map_or(SlowVariation::Const, |p| SlowVariation::PolyLog { p });
        TailLaw::new(self.alpha, sv, self.theta)
    }
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    law: LawArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exponent of the threshold b_n n^{-eps} for counting large eigenvalues.
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Also print every eigenvalue.
    #[arg(long)]
    full: bool,
}

#[derive(Debug, Args)]
struct FreeEnergyArgs {
    /// Matrix size; inferred from --eigs when those are given.
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated eigenvalues (raw scale); requires --bn.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    eigs: Option<Vec<f64>>,
    /// Normalizer b_n for --eigs.
    #[arg(long)]
    bn: Option<f64>,
    #[arg(long)]
    beta: f64,
    #[command(flatten)]
    law: LawArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sphere Monte Carlo samples (0 skips the Monte Carlo evaluation).
    #[arg(long, default_value_t = 100_000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 1)]
    mc_seed: u64,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Config JSON; a trials CSV or summary JSON written by this tool also works.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write SVG figures.
    #[arg(long)]
    plot: bool,
    /// Worker threads; falls back to LEVY_SSK_THREADS, then to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct SeriesArgs {
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    #[arg(long, default_value_t = 1000)]
    terms: usize,
}

#[derive(Debug, Args)]
struct DiagnosticsArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    law: LawArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
}

/// Parses `args` (program name first), runs the command and returns the exit status:
/// 0 on success, 1 for usage, input and configuration errors, 2 for numeric failures.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    1
                }
            };
        }
    };
    let result = match cli.command {
        Command::SampleSpectrum(a) => sample_spectrum(&a, out),
        Command::FreeEnergy(a) => free_energy(&a, out),
        Command::Experiment(a) => experiment(&a, out),
        Command::Series(a) => series(&a, out),
        Command::Diagnostics(a) => diagnostics(&a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn print_json(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn sample(law: &TailLaw, n: usize, seed: u64) -> Result<SampledMatrix> {
    sample_matrix(&EnsembleSpec::new(n, *law)?, seed)
}

fn sample_spectrum(a: &SampleArgs, out: &mut dyn Write) -> Result<()> {
    let m = sample(&a.law.law()?, a.n, a.seed)?;
    let s = eigen_decompose(&m)?;
    let (trace_err, fro_err) = identity_errors(&m, &s);
    let mut v = json!({
        "n": a.n,
        "seed": a.seed,
        "b_n": m.b_n(),
        "summary": s.summary(a.eps),
        "max_abs_over_bn": max_abs_entry(&m) / m.b_n(),
        "trace_identity_error": trace_err,
        "frobenius_identity_error": fro_err,
    });
    if a.full {
        v["eigenvalues"] = json!(s.eigs());
    }
    print_json(out, &v)
}

fn free_energy(a: &FreeEnergyArgs, out: &mut dyn Write) -> Result<()> {
    let (m, source) = match &a.eigs {
        Some(eigs) => {
            let b = a.bn.ok_or_else(|| Error::input("--eigs needs --bn"))?;
            if let Some(n) = a.n {
                if n != eigs.len() {
                    return Err(Error::input(format!("--n {n} does not match {} eigenvalues", eigs.len())));
                }
            }
            if eigs.is_empty() {
                return Err(Error::input("--eigs is empty"));
            }
            // the sphere average only sees the spectrum, so a diagonal matrix stands in for M
            let m = SampledMatrix::from_fn(eigs.len(), b, |i, j| if i == j { eigs[i] } else { 0.0 })?;
            (m, "eigenvalues")
        }
        None => {
            let n = a.n.ok_or_else(|| Error::input("either --eigs or --n is required"))?;
            (sample(&a.law.law()?, n, a.seed)?, "sampled")
        }
    };
    let s = eigen_decompose(&m)?;
    let ctx = SaddleContext::new(&s, a.beta)?;
    let sr = solve_gamma(&ctx)?;
    let mut v = json!({
        "source": source,
        "n": s.n(),
        "beta": a.beta,
        "b_n": s.b_n(),
        "lambda1_over_bn": s.mu1(),
        "phase": sr.phase,
        "gamma_over_bn": sr.w,
        "x_n": sr.x_n,
        "saddle_residual": sr.residual,
        "quadrature": log_z_quadrature(&ctx, &sr)?,
        "laplace": log_z_laplace(&ctx, &sr)?,
    });
    if a.mc_samples > 0 {
        let mut rng = stream(a.mc_seed);
        v["sphere_mc"] = json!(log_z_sphere_mc(&m, a.beta, a.mc_samples, &mut rng)?);
    }
    if s.n() == 2 {
        v["bessel_n2"] = json!(log_z_bessel_n2(s.eigs()[0], s.eigs()[1], a.beta, s.b_n()));
    }
    print_json(out, &v)
}

fn resolve_threads(flag: Option<usize>) -> Result<usize> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::input(format!("{THREADS_ENV}={v} is not a thread count"))),
        Err(_) => Ok(0),
    }
}

fn experiment(a: &ExperimentArgs, out: &mut dyn Write) -> Result<()> {
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| Error::input(format!("cannot read config {}: {e}", a.config.display())))?;
    let cfg = load_config(&text)?;
    let threads = resolve_threads(a.threads)?;
    let started_at = now();
    let (records, report) = run_experiment(&cfg, threads)?;
    let finished_at = now();

    std::fs::create_dir_all(&a.out)?;
    let csv_path = a.out.join("trials.csv");
    let summary_path = a.out.join("summary.json");
    let mut outputs = vec![csv_path.clone(), summary_path.clone()];
    let figures = if a.plot { figures(&cfg, &records)? } else { Vec::new() };
    outputs.extend(figures.iter().map(|(name, _)| a.out.join(name)));
    let manifest = RunManifest {
        config: cfg.clone(),
        version: VERSION.to_string(),
        master_seed: cfg.master_seed,
        started_at,
        finished_at,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };

    std::fs::write(&csv_path, trials_csv(&cfg, &records)?)?;
    std::fs::write(&summary_path, summary_json(&manifest, &report)?)?;
    let meta = serde_json::to_string(&manifest)?;
    for (name, draw) in &figures {
        std::fs::write(a.out.join(name), draw(&meta))?;
    }

    for c in &report.checks {
        writeln!(
            out,
            "{} {} value={:.6e} threshold={:.6e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        )?;
    }
    writeln!(out, "trials: {} (failed {})", report.total_trials, report.failed_trials)?;
    for p in &outputs {
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(())
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

type Figure = (String, Box<dyn Fn(&str) -> String>);

fn upper_quantile(xs: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return 1.0;
    }
    v.sort_by(f64::total_cmp);
    v[((v.len() - 1) as f64 * q) as usize]
}

fn range_of(xs: &[f64]) -> (f64, f64) {
    let finite = xs.iter().copied().filter(|x| x.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    if !(lo < hi) {
        let c = if lo.is_finite() { lo } else { 0.0 };
        return (c - 1.0, c + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Figures for a finished run as `(file name, renderer taking the manifest JSON)`.
fn figures(cfg: &ExperimentConfig, records: &[TrialRecord]) -> Result<Vec<Figure>> {
    let alpha = cfg.alpha;
    let mut figs: Vec<Figure> = Vec::new();
    for &n in &cfg.n_values {
        let top: Vec<f64> = ok_at(records, n).iter().map(|r| r.lambda1_over_bn).collect();
        if top.is_empty() {
            continue;
        }
        let hi = upper_quantile(&top, 0.95).max(2.0);
        let lo = top.iter().copied().fold(0.0, f64::min);
        let density = Series::curve("Fréchet density", lo.max(1e-9), hi, 200, move |x| {
            if x <= 0.0 {
                0.0
            } else {
                alpha * x.powf(-alpha - 1.0) * frechet_cdf(alpha, x)
            }
        });
        let title = format!("lambda_1 / b_n, n = {n}");
        figs.push((
            format!("lambda1_hist_n{n}.svg"),
            Box::new(move |meta| histogram_svg(&title, meta, &top, (lo, hi), 40, &density)),
        ));
    }

    let mut series: Vec<Series> = Vec::new();
    let title;
    match cfg.kind {
        ExperimentKind::LowTempLimit => {
            title = "log Z / n on F2 against the low-temperature pushforward".to_string();
            for &n in &cfg.n_values {
                let fe: Vec<f64> = ok_at(records, n)
                    .iter()
                    .filter(|r| r.phase == Some(Phase::F2))
                    .map(|r| r.free_energy())
                    .collect();
                series.push(Series::ecdf(format!("n = {n}"), &fe));
            }
            let count = cfg.options.pushforward_samples.min(20_000);
            let push = pushforward_sample(alpha, cfg.beta, count, derive_seed(cfg.master_seed, PUSHFORWARD_STREAM))?;
            series.push(Series::ecdf("limit", &push));
        }
        ExperimentKind::HighTempStability => {
            title = "log Z on F1".to_string();
            for &n in &cfg.n_values {
                let lz: Vec<f64> = ok_at(records, n)
                    .iter()
                    .filter(|r| r.phase == Some(Phase::F1))
                    .map(|r| r.log_z_quadrature)
                    .collect();
                series.push(Series::ecdf(format!("n = {n}"), &lz));
            }
        }
        ExperimentKind::TraceDiagnostics | ExperimentKind::MomentCheck => {
            title = "sum lambda_i^2 / b_n^2".to_string();
            for &n in &cfg.n_values {
                let v: Vec<f64> = ok_at(records, n).iter().map(|r| r.sumsq_over_bn2).collect();
                series.push(Series::ecdf(format!("n = {n}"), &v));
            }
        }
        ExperimentKind::PhaseProbability | ExperimentKind::Frechet => {
            title = "lambda_1 / b_n against the Fréchet law".to_string();
            let mut hi: f64 = 2.0;
            for &n in &cfg.n_values {
                let v: Vec<f64> = ok_at(records, n).iter().map(|r| r.lambda1_over_bn).collect();
                hi = hi.max(upper_quantile(&v, 0.95));
                series.push(Series::ecdf(format!("n = {n}"), &v));
            }
            series.push(Series::curve("exp(-x^-alpha)", 1e-3, hi, 200, move |x| frechet_cdf(alpha, x)));
        }
    }
    let all: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    let mut range = range_of(&all);
    if matches!(cfg.kind, ExperimentKind::PhaseProbability | ExperimentKind::Frechet) {
        range = (range.0.min(0.0), upper_quantile(&all, 0.97).max(2.0));
    }
    figs.push(("ecdf.svg".to_string(), Box::new(move |meta| ecdf_svg(&title, meta, range, &series))));
    Ok(figs)
}

fn series(a: &SeriesArgs, out: &mut dyn Write) -> Result<()> {
    print_json(out, &high_temp_series(a.alpha, a.beta, a.terms)?)
}

fn diagnostics(a: &DiagnosticsArgs, out: &mut dyn Write) -> Result<()> {
    let m = sample(&a.law.law()?, a.n, a.seed)?;
    let report = whp_diagnostics(&m, a.delta, a.eps);
    let s: Spectrum = eigen_decompose(&m)?;
    let max_abs = max_abs_entry(&m);
    let summary = s.summary(a.eps);
    print_json(
        out,
        &json!({
            "n": a.n,
            "seed": a.seed,
            "b_n": m.b_n(),
            "delta": a.delta,
            "eps": a.eps,
            "flags": report,
            "all_pass": report.all(),
            "max_abs_over_bn": max_abs / m.b_n(),
            "lambda1_over_max_abs": s.lambda1() / max_abs,
            "lambdan_over_max_abs": summary.lambda_n.abs() / max_abs,
            "gap_over_bn": summary.gap_over_bn,
            "gap_threshold": (a.n as f64).powf(-a.eps),
            "big_count": summary.big_count,
            "trace_over_bn": summary.trace_over_bn,
            "sumsq_over_bn2": summary.sumsq_over_bn2,
        }),
    )
}
