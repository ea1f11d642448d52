//! Batch front end: each subcommand runs one experiment and writes CSV/JSON
//! artifacts plus a manifest into the output directory.

use clap::parser::ValueSource;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use derivzeros::conditioned;
use derivzeros::ensembles::{Ensemble, Sampler};
use derivzeros::experiments::{self, DerivDistOptions};
use derivzeros::expansions::{self, Regime};
use derivzeros::io::{self, Manifest};
use derivzeros::polyderiv::RootSolver;
use derivzeros::stats::{self, Bandwidth};
use derivzeros::zeta_scan::{self, ScanOptions};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const EXIT_OK: u8 = 0;
const EXIT_VALIDATION: u8 = 1;
const EXIT_GATE: u8 = 2;
const EXIT_USAGE: u8 = 64;
const OUT_ENV: &str = "DERIVZEROS_OUT";

#[derive(Parser, Debug)]
#[command(name = "derivzeros", version, about = "Zeros of derivatives of CUE characteristic polynomials and of zeta'")]
#[command(args_override_self = true)]
struct Cli {
    /// Output directory (default: $DERIVZEROS_OUT, else ./derivzeros-out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// JSON object of flag defaults for the subcommand; explicit flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Validate flags and write the manifest without running
    #[arg(long, global = true)]
    manifest_only: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Histogram of S = N(1 - |z'|) over roots of the derivative
    DerivDist(DerivArgs),
    /// Empirical CDF of S against the integrated small-s law
    CdfTail(CdfArgs),
    /// Nearest-neighbour spacing CDF against its small-s expansion
    Spacing(SpacingArgs),
    /// Fit (b1, b2) from the close-pair displacement and compare to the expansion
    VerifyExpansion(VerifyArgs),
    /// Importance-sampled moments of the conditioned ensemble
    ConditionedMoments(MomentArgs),
    /// Weighted one-level density of the conditioned ensemble
    OneLevel(OneLevelArgs),
    /// Zeros of zeta' in a height window
    ZetaScan(ZetaArgs),
    /// Argument-principle uniqueness of the close-pair root
    UniquenessCheck(UniquenessArgs),
    /// Analytic tables
    Tables(TableArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum EnsembleArg {
    Cue,
    Coe,
    Poisson,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SamplerArg {
    Verblunsky,
    Dense,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SolverArg {
    Aberth,
    Companion,
}

impl From<EnsembleArg> for Ensemble {
    fn from(e: EnsembleArg) -> Self {
        match e {
            EnsembleArg::Cue => Ensemble::Cue,
            EnsembleArg::Coe => Ensemble::Coe,
            EnsembleArg::Poisson => Ensemble::Poisson,
        }
    }
}

impl From<SamplerArg> for Sampler {
    fn from(s: SamplerArg) -> Self {
        match s {
            SamplerArg::Verblunsky => Sampler::Verblunsky,
            SamplerArg::Dense => Sampler::Dense,
        }
    }
}

impl From<SolverArg> for RootSolver {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Aberth => RootSolver::Aberth,
            SolverArg::Companion => RootSolver::Companion,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct DerivArgs {
    #[arg(long, value_enum, default_value = "cue")]
    ensemble: EnsembleArg,
    #[arg(long, default_value_t = 40)]
    n: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "verblunsky")]
    sampler: SamplerArg,
    #[arg(long, value_enum, default_value = "aberth")]
    solver: SolverArg,
}

impl DerivArgs {
    fn options(&self) -> DerivDistOptions {
        DerivDistOptions {
            ensemble: self.ensemble.into(),
            n: self.n,
            samples: self.samples,
            seed: self.seed,
            sampler: self.sampler.into(),
            solver: self.solver.into(),
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct CdfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    base: DerivArgs,
    /// Points at which the CDF is compared
    #[arg(long, value_delimiter = ',', default_value = "0.02,0.05,0.1,0.15")]
    points: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
struct SpacingArgs {
    #[arg(long, default_value_t = 40)]
    n: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3")]
    s: Vec<f64>,
    #[arg(long, value_enum, default_value = "verblunsky")]
    sampler: SamplerArg,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long, default_value_t = 24)]
    n: usize,
    /// Exactly three pair separations (rescaled units)
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.02,0.04")]
    theta: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Minimum distance of background phases from the pair (rescaled units)
    #[arg(long, default_value_t = 0.5)]
    margin: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol_b1: f64,
    #[arg(long, default_value_t = 1e-3)]
    tol_b2: f64,
    #[arg(long, default_value_t = 5.5)]
    min_order: f64,
}

#[derive(Args, Debug, Serialize)]
struct MomentArgs {
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    batches: usize,
}

#[derive(Args, Debug, Serialize)]
struct OneLevelArgs {
    #[arg(long, default_value_t = 22)]
    n: usize,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    batches: usize,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    #[arg(long, default_value_t = 5.0)]
    xi_max: f64,
}

#[derive(Args, Debug, Serialize)]
struct ZetaArgs {
    #[arg(long, default_value_t = 1000.0)]
    t_lo: f64,
    #[arg(long, default_value_t = 2000.0)]
    t_hi: f64,
    /// Also confirm there are no zeros of zeta' with 0 < Re s < 1/2
    #[arg(long)]
    left_strip: bool,
    #[arg(long, default_value_t = 100)]
    bins: usize,
    #[arg(long, default_value_t = 5.0)]
    x_max: f64,
}

#[derive(Args, Debug, Serialize)]
struct UniquenessArgs {
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 0.25)]
    theta_max: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct TableArgs {
    /// Largest N in the moment table
    #[arg(long, default_value_t = 64)]
    n_max: usize,
    /// N used for the finite-N spacing and pair-gap columns
    #[arg(long, default_value_t = 40)]
    n: usize,
    #[arg(long, default_value_t = 10.0)]
    t_max: f64,
    #[arg(long, default_value_t = 1001)]
    points: usize,
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::DerivDist(_) => "deriv-dist",
            Cmd::CdfTail(_) => "cdf-tail",
            Cmd::Spacing(_) => "spacing",
            Cmd::VerifyExpansion(_) => "verify-expansion",
            Cmd::ConditionedMoments(_) => "conditioned-moments",
            Cmd::OneLevel(_) => "one-level",
            Cmd::ZetaScan(_) => "zeta-scan",
            Cmd::UniquenessCheck(_) => "uniqueness-check",
            Cmd::Tables(_) => "tables",
        }
    }

    fn flags(&self) -> Value {
        let v = match self {
            Cmd::DerivDist(a) => serde_json::to_value(a),
            Cmd::CdfTail(a) => serde_json::to_value(a),
            Cmd::Spacing(a) => serde_json::to_value(a),
            Cmd::VerifyExpansion(a) => serde_json::to_value(a),
            Cmd::ConditionedMoments(a) => serde_json::to_value(a),
            Cmd::OneLevel(a) => serde_json::to_value(a),
            Cmd::ZetaScan(a) => serde_json::to_value(a),
            Cmd::UniquenessCheck(a) => serde_json::to_value(a),
            Cmd::Tables(a) => serde_json::to_value(a),
        };
        v.unwrap_or(Value::Null)
    }

    /// (seed, N, samples) for the manifest.
    fn summary(&self) -> (Option<u64>, Option<usize>, Option<usize>) {
        match self {
            Cmd::DerivDist(a) => (Some(a.seed), Some(a.n), Some(a.samples)),
            Cmd::CdfTail(a) => (Some(a.base.seed), Some(a.base.n), Some(a.base.samples)),
            Cmd::Spacing(a) => (Some(a.seed), Some(a.n), Some(a.samples)),
            Cmd::VerifyExpansion(a) => (Some(a.seed), Some(a.n), Some(a.trials)),
            Cmd::ConditionedMoments(a) => (Some(a.seed), Some(a.n), Some(a.samples)),
            Cmd::OneLevel(a) => (Some(a.seed), Some(a.n), Some(a.samples)),
            Cmd::ZetaScan(_) => (None, None, None),
            Cmd::UniquenessCheck(a) => (Some(a.seed), Some(a.n), Some(a.trials)),
            Cmd::Tables(a) => (None, Some(a.n), None),
        }
    }

    /// Cheap argument checks shared by real and dry runs.
    fn validate(&self) -> Result<(), String> {
        let positive = |name: &str, v: usize| if v == 0 { Err(format!("--{name} must be positive")) } else { Ok(()) };
        let positive_f = |name: &str, v: f64| if v > 0.0 && v.is_finite() { Ok(()) } else { Err(format!("--{name} must be positive")) };
        match self {
            Cmd::DerivDist(a) | Cmd::CdfTail(CdfArgs { base: a, .. }) => {
                positive("n", a.n)?;
                positive("samples", a.samples)?;
                if a.n < 2 {
                    return Err("--n must be at least 2".into());
                }
            }
            Cmd::Spacing(a) => {
                positive("n", a.n)?;
                positive("samples", a.samples)?;
                a.s.iter().try_for_each(|&s| positive_f("s", s))?;
            }
            Cmd::VerifyExpansion(a) => {
                positive("n", a.n)?;
                positive("trials", a.trials)?;
                if a.theta.len() != 3 {
                    return Err("--theta takes exactly three values".into());
                }
                a.theta.iter().try_for_each(|&t| positive_f("theta", t))?;
            }
            Cmd::ConditionedMoments(a) => {
                positive("n", a.n)?;
                positive("samples", a.samples)?;
                positive("batches", a.batches)?;
            }
            Cmd::OneLevel(a) => {
                positive("n", a.n)?;
                positive("samples", a.samples)?;
                positive("batches", a.batches)?;
                positive("bins", a.bins)?;
                positive_f("xi-max", a.xi_max)?;
            }
            Cmd::ZetaScan(a) => {
                positive("bins", a.bins)?;
                positive_f("x-max", a.x_max)?;
                if !(a.t_lo < a.t_hi) {
                    return Err("--t-lo must be below --t-hi".into());
                }
            }
            Cmd::UniquenessCheck(a) => {
                positive("n", a.n)?;
                positive("trials", a.trials)?;
                positive_f("theta-max", a.theta_max)?;
            }
            Cmd::Tables(a) => {
                positive("points", a.points)?;
                positive_f("t-max", a.t_max)?;
                if a.n_max < 4 || a.n < 4 {
                    return Err("--n and --n-max must be at least 4".into());
                }
            }
        }
        Ok(())
    }
}

/// Why a run did not exit 0.
#[derive(Debug, Serialize)]
struct Failure {
    exit_code: u8,
    kind: &'static str,
    message: String,
    details: Value,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure { exit_code: EXIT_VALIDATION, kind: "validation", message: message.into(), details: Value::Null }
    }

    fn gate(message: impl Into<String>, details: Value) -> Self {
        Failure { exit_code: EXIT_GATE, kind: "numerical-gate", message: message.into(), details }
    }
}

impl From<derivzeros::Error> for Failure {
    fn from(e: derivzeros::Error) -> Self {
        use derivzeros::Error as E;
        match e {
            E::InvalidArgument(_) | E::DegreeTooLarge(_) | E::OutOfRange(_) | E::TooFewSamples { .. } | E::Io(_) | E::Json(_) => {
                Failure::validation(e.to_string())
            }
            _ => Failure::gate(e.to_string(), Value::Null),
        }
    }
}

struct Run {
    dir: PathBuf,
    manifest: Manifest,
}

impl Run {
    fn write(&mut self, name: &str, text: &str) -> Result<(), Failure> {
        let p = io::write_text(&self.dir, name, text)?;
        self.manifest.outputs.push(p);
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(v).map_err(derivzeros::Error::from)?;
        self.write(name, &text)
    }
}

fn deriv_dist(a: &DerivArgs, run: &mut Run) -> Result<(), Failure> {
    let d = experiments::deriv_dist(&a.options(), &stats::default_s_edges())?;
    run.write("deriv_dist.csv", &io::histogram_csv(&d.hist))?;
    run.write("deriv_dist.json", &d.hist.to_json()?)?;
    let modes = stats::detect_modes(&d.hist, Bandwidth::Silverman).ok();
    run.manifest.extra = json!({ "roots": d.roots, "flagged": d.flagged, "modes": modes });
    Ok(())
}

fn cdf_tail(a: &CdfArgs, run: &mut Run) -> Result<(), Failure> {
    let d = experiments::deriv_dist(&a.base.options(), &experiments::cdf_edges())?;
    run.write("cdf.csv", &io::cdf_csv(&stats::empirical_cdf(&d.hist)?))?;
    let rows: Vec<Vec<f64>> = experiments::cdf_tail(&d, &a.points)
        .iter()
        .map(|r| vec![r.s, r.empirical, r.law, r.relative_error, r.consistent])
        .collect();
    run.write("cdf_tail.csv", &io::table_csv(&["s", "empirical", "law", "relative_error", "law_consistent"], &rows))?;
    run.manifest.extra = json!({ "roots": d.roots, "flagged": d.flagged });
    Ok(())
}

fn spacing(a: &SpacingArgs, run: &mut Run) -> Result<(), Failure> {
    let rows = experiments::spacing_law(a.n, a.samples, a.seed, &a.s, a.sampler.into())?;
    let rows: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.s, r.empirical, r.stderr, r.predicted]).collect();
    run.write("spacing.csv", &io::table_csv(&["s", "empirical", "stderr", "predicted"], &rows))
}

fn verify_expansion(a: &VerifyArgs, run: &mut Run) -> Result<(), Failure> {
    let thetas = [a.theta[0], a.theta[1], a.theta[2]];
    let fits = experiments::verify_expansion(a.n, &thetas, a.trials, a.seed, a.margin)?;
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    for (k, f) in fits.iter().enumerate() {
        let db1 = (f.fitted_b1 - f.predicted_b1).norm();
        let db2 = (f.fitted_b2 - f.predicted_b2).norm() / f.predicted_b2.norm();
        let order = f.remainder_orders.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(db1 <= a.tol_b1 && db2 <= a.tol_b2 && order >= a.min_order) {
            bad.push(json!({ "trial": k, "db1": db1, "db2_rel": db2, "min_order": order, "background": f.background }));
        }
        rows.push(vec![
            k as f64,
            f.fitted_b1.re,
            f.fitted_b1.im,
            f.predicted_b1.re,
            f.predicted_b1.im,
            f.fitted_b2.re,
            f.fitted_b2.im,
            f.predicted_b2.re,
            f.predicted_b2.im,
            db1,
            db2,
            order,
        ]);
    }
    let header = [
        "trial", "b1_fit_re", "b1_fit_im", "b1_re", "b1_im", "b2_fit_re", "b2_fit_im", "b2_re", "b2_im", "db1", "db2_rel", "min_order",
    ];
    run.write("verify_expansion.csv", &io::table_csv(&header, &rows))?;
    if !bad.is_empty() {
        return Err(Failure::gate(format!("{} of {} fits outside tolerance", bad.len(), fits.len()), Value::Array(bad)));
    }
    Ok(())
}

fn conditioned_moments(a: &MomentArgs, run: &mut Run) -> Result<(), Failure> {
    let r = conditioned::estimate_moments(a.n, a.samples, a.seed, a.batches, 0)?;
    run.write("moments.json", &r.to_json()?)?;
    let mut s = String::from("name,mean,stderr,predicted,z_score\n");
    for e in &r.entries {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        s.push_str(&format!("{},{},{},{},{}\n", e.name, e.mean, e.stderr, opt(e.predicted), opt(e.z_score)));
    }
    run.write("moments.csv", &s)?;
    run.manifest.extra = json!({ "effective_sample_size": r.effective_sample_size, "warnings": r.warnings });
    Ok(())
}

fn one_level(a: &OneLevelArgs, run: &mut Run) -> Result<(), Failure> {
    let edges = stats::uniform_edges(0.0, a.xi_max, a.bins);
    let o = conditioned::empirical_one_level(a.n, a.samples, a.seed, &edges, a.batches)?;
    run.write("one_level.csv", &io::one_level_csv(&o))?;
    run.manifest.extra = json!({ "effective_sample_size": o.effective_sample_size });
    Ok(())
}

fn zeta_scan(a: &ZetaArgs, run: &mut Run) -> Result<(), Failure> {
    let r = zeta_scan::find_zeta_prime_zeros(a.t_lo, a.t_hi, ScanOptions { check_left_strip: a.left_strip, ..Default::default() })?;
    run.write("zeta_prime_zeros.csv", &io::zeros_csv(&r.zeros))?;
    let mut notes = Vec::new();
    match zeta_scan::normalized_distribution(&r.zeros, &stats::uniform_edges(0.0, a.x_max, a.bins)) {
        Ok(d) => run.write("zeta_prime_x.csv", &io::histogram_csv(&d))?,
        Err(e) => notes.push(format!("no histogram: {e}")),
    }
    let expected = zeta_scan::integrated_density(a.t_lo, a.t_hi);
    run.manifest.extra = json!({
        "zeros": r.zeros.len(),
        "integrated_density": expected,
        "left_strip_count": r.left_strip_count,
        "notes": notes,
    });
    let off_line: Vec<f64> = r.zeros.iter().filter(|z| z.beta <= 0.5).map(|z| z.gamma).collect();
    let left = r.left_strip_count.unwrap_or(0);
    if !r.failures.is_empty() || !off_line.is_empty() || left != 0 {
        let details = json!({ "scan_failures": r.failures, "beta_not_above_half": off_line, "left_strip_count": left });
        return Err(Failure::gate("zeta' scan incomplete or found zeros with beta <= 1/2", details));
    }
    Ok(())
}

fn uniqueness_check(a: &UniquenessArgs, run: &mut Run) -> Result<(), Failure> {
    let r = experiments::uniqueness_check(a.n, a.theta_max, a.trials, a.seed)?;
    run.write_json("uniqueness.json", &r)?;
    if !r.violations.is_empty() {
        let details = serde_json::to_value(&r.violations).unwrap_or(Value::Null);
        return Err(Failure::gate(format!("{} of {} trials did not count exactly one root", r.violations.len(), r.trials), details));
    }
    Ok(())
}

fn tables(a: &TableArgs, run: &mut Run) -> Result<(), Failure> {
    let m = a.points.max(2);
    let grid: Vec<f64> = (0..m).map(|k| a.t_max * k as f64 / (m - 1) as f64).collect();
    let mut w1 = Vec::new();
    for &t in &grid {
        w1.push(vec![t, expansions::one_level_density_w1(0, t)?, expansions::one_level_density_w1(1, t)?, expansions::one_level_density_w1(2, t)?]);
    }
    run.write("w1.csv", &io::table_csv(&["t", "w1_a0", "w1_a1", "w1_a2"], &w1))?;

    let mut law = Vec::new();
    for k in 1..=100 {
        let s = 0.005 * k as f64;
        law.push(vec![
            s,
            expansions::q_asymptotics(s, Regime::Small),
            expansions::q_small_cdf(s),
            expansions::spacing_density_p2(s, a.n)?,
            expansions::spacing_cdf_p2(s, a.n)?,
        ]);
    }
    run.write("small_s.csv", &io::table_csv(&["s", "q_small", "q_small_cdf", "spacing_density", "spacing_cdf"], &law))?;

    let mut mom = Vec::new();
    for n in 4..=a.n_max {
        let p = expansions::moment_polynomials(n)?;
        mom.push(vec![n as f64, p.c_n_inv, p.a0_mean, p.a0_cubed, p.a1_mean, p.a0a1_mean, p.b2_mean, p.b2_mean_consistent]);
    }
    let header = ["n", "mean_weight", "a0", "a0_cubed", "a1", "a0a1", "b2_direct", "b2_consistent"];
    run.write("moments_poly.csv", &io::table_csv(&header, &mom))
}

fn execute(cmd: &Cmd, run: &mut Run) -> Result<(), Failure> {
    match cmd {
        Cmd::DerivDist(a) => deriv_dist(a, run),
        Cmd::CdfTail(a) => cdf_tail(a, run),
        Cmd::Spacing(a) => spacing(a, run),
        Cmd::VerifyExpansion(a) => verify_expansion(a, run),
        Cmd::ConditionedMoments(a) => conditioned_moments(a, run),
        Cmd::OneLevel(a) => one_level(a, run),
        Cmd::ZetaScan(a) => zeta_scan(a, run),
        Cmd::UniquenessCheck(a) => uniqueness_check(a, run),
        Cmd::Tables(a) => tables(a, run),
    }
}

/// Config values as flags: arrays join with commas, `true` becomes a bare
/// switch, `false` and null are dropped.
fn config_args(v: &Value) -> Result<Vec<(String, Option<String>)>, String> {
    let obj = v.as_object().ok_or("config must be a JSON object")?;
    let mut out = Vec::new();
    for (k, v) in obj {
        let flag = k.replace('_', "-");
        let scalar = |v: &Value| match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            _ => Err(format!("config key '{k}' has an unsupported value")),
        };
        match v {
            Value::Bool(true) => out.push((flag, None)),
            Value::Bool(false) | Value::Null => {}
            Value::Array(a) => out.push((flag, Some(a.iter().map(scalar).collect::<Result<Vec<_>, _>>()?.join(",")))),
            other => out.push((flag, Some(scalar(other)?))),
        }
    }
    Ok(out)
}

fn parse(argv: &[String]) -> Result<Cli, Result<clap::Error, Failure>> {
    let matches = Cli::command().try_get_matches_from(argv).map_err(Ok)?;
    let Some(path) = matches.get_one::<PathBuf>("config") else {
        return Cli::from_arg_matches(&matches).map_err(Ok);
    };
    let text = std::fs::read_to_string(path).map_err(|e| Err(Failure::validation(format!("config {}: {e}", path.display()))))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Err(Failure::validation(format!("config {}: {e}", path.display()))))?;
    let sub = matches.subcommand().map(|(_, m)| m);
    let mut full = argv.to_vec();
    for (flag, val) in config_args(&value).map_err(|e| Err(Failure::validation(e)))? {
        let id = flag.replace('-', "_");
        let given = sub.filter(|m| m.try_contains_id(&id).unwrap_or(false)).and_then(|m| m.value_source(&id));
        if given == Some(ValueSource::CommandLine) {
            continue;
        }
        full.push(format!("--{flag}"));
        full.extend(val);
    }
    let matches = Cli::command().try_get_matches_from(&full).map_err(Ok)?;
    Cli::from_arg_matches(&matches).map_err(Ok)
}

fn output_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("derivzeros-out"))
}

fn report(dir: &Path, command: &str, f: &Failure) -> u8 {
    let record = json!({ "command": command, "exit_code": f.exit_code, "kind": f.kind, "message": f.message, "details": f.details });
    eprintln!("{record}");
    let text = serde_json::to_string_pretty(&record).unwrap_or_default();
    if let Err(e) = io::write_text(dir, "failure.json", &text) {
        eprintln!("could not write failure record: {e}");
    }
    f.exit_code
}

fn run(argv: &[String]) -> u8 {
    let cli = match parse(argv) {
        Ok(c) => c,
        Err(Ok(e)) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
        Err(Err(f)) => {
            eprintln!("{}", json!({ "exit_code": f.exit_code, "kind": f.kind, "message": f.message }));
            return f.exit_code;
        }
    };
    let dir = output_dir(&cli);
    let name = cli.cmd.name();
    if let Err(m) = cli.cmd.validate() {
        return report(&dir, name, &Failure::validation(m));
    }
    if let Some(w) = cli.workers {
        if w == 0 {
            return report(&dir, name, &Failure::validation("--workers must be positive"));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            log::warn!("worker pool already initialized: {e}");
        }
    }
    let mut manifest = Manifest::new(name);
    (manifest.seed, manifest.n, manifest.samples) = cli.cmd.summary();
    manifest.flags = cli.cmd.flags();
    let mut run = Run { dir: dir.clone(), manifest };
    let start = Instant::now();
    let result = if cli.manifest_only { Ok(()) } else { execute(&cli.cmd, &mut run) };
    run.manifest.wall_time = start.elapsed().as_secs_f64();
    if let Err(f) = &result {
        run.manifest.failures.push(f.message.clone());
    }
    let written = run.manifest.to_json().map_err(Failure::from).and_then(|m| io::write_text(&dir, "manifest.json", &m).map_err(Failure::from));
    match (result, written) {
        (Err(f), _) | (Ok(()), Err(f)) => report(&dir, name, &f),
        (Ok(()), Ok(_)) => EXIT_OK,
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let argv: Vec<String> = std::env::args().collect();
    ExitCode::from(run(&argv))
}
