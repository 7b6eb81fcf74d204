//! Command-line entry point. Exit codes: 0 success, 1 usage or validation
//! error, 2 failed self-check.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use super::counterexample::counterexample_check;
use super::sweep::{full_ks, run_sweep, write_sweep_csv, SweepConfig};
use super::table1::{max_published_deviation, published_pairs, table1_report, write_table1_csv};
use super::timing::{timing_bench, write_timing_csv, DEFAULT_POINTS, PUBLISHED_ROWS};
use crate::error::{Error, Result};
use crate::ista::{ista_solve, mu_max_from_nu, nu_max, IstaConfig, Problem};
use crate::prox_zoo::{PenaltyKind, PenaltySpec, ScalarProx, PENALTY_NAMES};
use crate::sensing::{
    gen_matrix, gen_signal, relative_error, stream_seed, write_matrix_csv, write_vector_csv,
    MatrixKind, SignalSpec, SUCCESS_THRESHOLD,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "pieprox",
    version,
    about = "PiE and companion proximal operators, ISTA, and compressed-sensing benchmarks",
    after_help = "Worker threads for `sweep` follow RAYON_NUM_THREADS."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one scalar proximal map.
    Prox(ProxArgs),
    /// Threshold x* and jump location for (mu*lambda, sigma) pairs.
    Threshold(ThresholdArgs),
    /// Time three PiE prox formulas on a grid over [0, 10].
    Timing(TimingArgs),
    /// Run the counterexample checks for the older closed form.
    Counterexample,
    /// Success-rate sweep over sparsity levels and penalties.
    Sweep(SweepArgs),
    /// Recover a single random signal and print its relative error.
    Recover(RecoverArgs),
}

#[derive(Debug, Args)]
struct OutArg {
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProxArgs {
    /// pie, soft, hard, half, scad, mcp, log, tl1 or cap.
    #[arg(long, default_value = "pie")]
    penalty: String,
    #[arg(long)]
    lambda: Option<f64>,
    /// PiE shape.
    #[arg(long)]
    sigma: Option<f64>,
    /// Shape for scad, mcp, log, tl1, cap.
    #[arg(long)]
    a: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, allow_hyphen_values = true)]
    x0: f64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    /// Product mu*lambda; all published pairs are used when omitted.
    #[arg(long, requires = "sigma")]
    mulambda: Option<f64>,
    #[arg(long, requires = "mulambda")]
    sigma: Option<f64>,
    /// Compare against the published values (exit 2 beyond 1e-6).
    #[arg(long)]
    check: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct TimingArgs {
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    points: usize,
    /// Single row (mu, lambda, sigma); the four published rows when omitted.
    #[arg(long, requires_all = ["lambda", "sigma"])]
    mu: Option<f64>,
    #[arg(long, requires_all = ["mu", "sigma"])]
    lambda: Option<f64>,
    #[arg(long, requires_all = ["mu", "lambda"])]
    sigma: Option<f64>,
    /// Require threshold < refined < baseline and a ratio <= 0.9 (exit 2).
    #[arg(long)]
    check: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// gaussian, dct, dctF or dct:F.
    #[arg(long, default_value = "gaussian")]
    matrix: MatrixKind,
    /// DCT refinement factor; overrides the one given in --matrix.
    #[arg(long)]
    refinement: Option<u32>,
    #[arg(long, default_value_t = 128)]
    m: usize,
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Step size as a fraction of mu_max.
    #[arg(long, default_value_t = 0.99)]
    mu_frac: f64,
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
    #[arg(long, default_value_t = 3000)]
    maxiter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ProblemArgs {
    fn matrix_kind(&self) -> Result<MatrixKind> {
        match (self.matrix, self.refinement) {
            (_, Some(0)) => Err(Error::InvalidParameter {
                name: "refinement",
                value: 0.0,
                reason: "must be >= 1",
            }),
            (MatrixKind::Dct { .. }, Some(f)) => Ok(MatrixKind::Dct { refinement: f }),
            (MatrixKind::Gaussian, Some(_)) => Err(Error::InvalidParameter {
                name: "refinement",
                value: f64::NAN,
                reason: "only applies to DCT matrices",
            }),
            (kind, None) => Ok(kind),
        }
    }
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Sparsity levels, comma separated.
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Penalties as name[:lambda[:shape]], comma separated or repeated;
    /// `all` selects the nine defaults.
    #[arg(long, value_delimiter = ',', default_value = "pie")]
    penalty: Vec<String>,
    /// 100 trials on k = 4, 8, ..., 60.
    #[arg(long)]
    full: bool,
    /// Write NA in the time column so the output is reproducible.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct RecoverArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = 60)]
    k: usize,
    #[arg(long, default_value = "pie")]
    penalty: String,
    /// Directory for A.csv, x.csv and x_hat.csv.
    #[arg(long)]
    export: Option<PathBuf>,
    #[command(flatten)]
    out: OutArg,
}

fn parse_penalties(items: &[String]) -> Result<Vec<PenaltySpec>> {
    let mut specs = Vec::new();
    for item in items {
        if item.trim().eq_ignore_ascii_case("all") {
            specs.extend(
                PENALTY_NAMES
                    .iter()
                    .filter_map(|n| PenaltySpec::comparison_default(n)),
            );
        } else {
            specs.push(item.parse()?);
        }
    }
    Ok(specs)
}

fn prox_spec(args: &ProxArgs) -> Result<PenaltySpec> {
    let base: PenaltySpec = args.penalty.parse()?;
    let lambda = args.lambda.unwrap_or(base.lambda());
    let kind = match (base.kind(), args.sigma, args.a) {
        (PenaltyKind::Pie { sigma }, s, None) => PenaltyKind::Pie {
            sigma: s.unwrap_or(sigma),
        },
        (k @ (PenaltyKind::Soft | PenaltyKind::Hard | PenaltyKind::Half), None, None) => k,
        (PenaltyKind::Scad { a }, None, x) => PenaltyKind::Scad { a: x.unwrap_or(a) },
        (PenaltyKind::Mcp { a }, None, x) => PenaltyKind::Mcp { a: x.unwrap_or(a) },
        (PenaltyKind::Log { a }, None, x) => PenaltyKind::Log { a: x.unwrap_or(a) },
        (PenaltyKind::Tl1 { a }, None, x) => PenaltyKind::Tl1 { a: x.unwrap_or(a) },
        (PenaltyKind::Cap { a }, None, x) => PenaltyKind::Cap { a: x.unwrap_or(a) },
        (_, s, a) => {
            return Err(Error::InvalidParameter {
                name: if s.is_some() { "sigma" } else { "a" },
                value: s.or(a).unwrap_or(f64::NAN),
                reason: "shape flag does not apply to this penalty",
            })
        }
    };
    PenaltySpec::new(kind, lambda)
}

fn open_out<'a>(out: &OutArg, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    match &out.out {
        Some(path) => Ok(Box::new(File::create(path)?)),
        None => Ok(Box::new(stdout)),
    }
}

enum Outcome {
    Done,
    CheckFailed(String),
}

fn run(cli: Cli, stdout: &mut dyn Write) -> Result<Outcome> {
    match cli.command {
        Command::Prox(args) => {
            let spec = prox_spec(&args)?;
            let set = ScalarProx::new(&spec, args.mu)?.prox(args.x0);
            let values: Vec<String> = set.values().iter().map(|v| v.to_string()).collect();
            let mut w = csv::Writer::from_writer(open_out(&args.out, stdout)?);
            w.write_record(["penalty", "mu", "x0", "prox"])?;
            w.write_record([
                spec.to_string(),
                args.mu.to_string(),
                args.x0.to_string(),
                values.join(";"),
            ])?;
            w.flush()?;
            Ok(Outcome::Done)
        }
        Command::Threshold(args) => {
            let pairs = match (args.mulambda, args.sigma) {
                (Some(ml), Some(s)) => vec![(ml, s)],
                _ => published_pairs(),
            };
            let rows = table1_report(&pairs);
            write_table1_csv(&rows, open_out(&args.out, stdout)?)?;
            if args.check {
                let dev = max_published_deviation(&rows)?;
                if dev > 1e-6 {
                    return Ok(Outcome::CheckFailed(format!(
                        "largest deviation from published values is {dev}"
                    )));
                }
            } else if let Some(Err(e)) = rows.iter().map(|r| r.result.clone()).find(Result::is_err)
            {
                return Err(e);
            }
            Ok(Outcome::Done)
        }
        Command::Timing(args) => {
            let rows_in = match (args.mu, args.lambda, args.sigma) {
                (Some(mu), Some(l), Some(s)) => vec![(mu, l, s)],
                _ => PUBLISHED_ROWS.to_vec(),
            };
            let rows = match timing_bench(args.points, &rows_in) {
                Err(Error::Assertion(msg)) => return Ok(Outcome::CheckFailed(msg)),
                r => r?,
            };
            write_timing_csv(&rows, open_out(&args.out, stdout)?)?;
            if args.check {
                if let Some(bad) = rows
                    .iter()
                    .find(|r| !r.ordering_holds() || r.threshold_ratio() > 0.9)
                {
                    return Ok(Outcome::CheckFailed(format!(
                        "timing ordering violated for (mu, lambda, sigma) = ({}, {}, {})",
                        bad.mu, bad.lambda, bad.sigma
                    )));
                }
            }
            Ok(Outcome::Done)
        }
        Command::Counterexample => {
            let report = counterexample_check();
            report.write_csv(&mut *stdout)?;
            if report.passed() {
                Ok(Outcome::Done)
            } else {
                let failed: Vec<_> = report
                    .checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(|c| c.name)
                    .collect();
                Ok(Outcome::CheckFailed(format!(
                    "failed: {}",
                    failed.join(", ")
                )))
            }
        }
        Command::Sweep(args) => {
            let penalties = parse_penalties(&args.penalty)?;
            let mut cfg = if args.full {
                SweepConfig::full(penalties)
            } else {
                SweepConfig::desk(penalties)
            };
            let p = &args.problem;
            cfg.matrix = p.matrix_kind()?;
            cfg.m = p.m;
            cfg.n = p.n;
            cfg.mu_fraction = p.mu_frac;
            cfg.eps = p.eps;
            cfg.maxiter = p.maxiter;
            cfg.seed = p.seed;
            cfg.record_time = !args.no_timing;
            if !args.k.is_empty() {
                cfg.ks = args.k.clone();
            } else if args.full {
                cfg.ks = full_ks();
            }
            if let Some(t) = args.trials {
                cfg.trials = t;
            }
            let reports = run_sweep(&cfg)?;
            write_sweep_csv(&reports, open_out(&args.out, stdout)?)?;
            Ok(Outcome::Done)
        }
        Command::Recover(args) => {
            let spec: PenaltySpec = args.penalty.parse()?;
            let p = &args.problem;
            let kind = p.matrix_kind()?;
            let a = gen_matrix(kind, p.m, p.n, p.seed)?;
            let x = gen_signal(&SignalSpec::new(p.n, args.k, stream_seed(p.seed, 1, 0)))?;
            let b = a.dot(&x);
            let nu = nu_max(a.view())?;
            let mu = p.mu_frac * mu_max_from_nu(nu, &spec);
            let prob = Problem::new(a, b, spec)?;
            let cfg = IstaConfig::new(mu)
                .eps(p.eps)
                .maxiter(p.maxiter)
                .record_trace(false);
            let r = ista_solve(&prob, &cfg)?;
            let err = relative_error(r.x_final.view(), x.view())?;
            if let Some(dir) = &args.export {
                export(dir, &prob, &x, &r.x_final)?;
            }
            let mut w = csv::Writer::from_writer(open_out(&args.out, stdout)?);
            w.write_record([
                "penalty",
                "k",
                "mu",
                "nu_max",
                "iterations",
                "relative_error",
                "success",
            ])?;
            w.write_record([
                spec.to_string(),
                args.k.to_string(),
                mu.to_string(),
                nu.to_string(),
                r.iterations.to_string(),
                err.to_string(),
                (err < SUCCESS_THRESHOLD).to_string(),
            ])?;
            w.flush()?;
            Ok(Outcome::Done)
        }
    }
}

fn export(
    dir: &Path,
    prob: &Problem,
    x: &ndarray::Array1<f64>,
    x_hat: &ndarray::Array1<f64>,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_matrix_csv(prob.a(), File::create(dir.join("A.csv"))?)?;
    write_vector_csv(x.view(), File::create(dir.join("x.csv"))?)?;
    write_vector_csv(x_hat.view(), File::create(dir.join("x_hat.csv"))?)?;
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn cli_main<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{rendered}");
                    EXIT_INVALID
                }
            };
        }
    };
    match run(cli, stdout) {
        Ok(Outcome::Done) => EXIT_OK,
        Ok(Outcome::CheckFailed(msg)) => {
            let _ = writeln!(stderr, "check failed: {msg}");
            EXIT_CHECK_FAILED
        }
        Err(Error::Assertion(msg)) => {
            let _ = writeln!(stderr, "check failed: {msg}");
            EXIT_CHECK_FAILED
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INVALID
        }
    }
}

/// [`cli_main`] on the process arguments and standard streams.
pub fn main_with_std() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    cli_main(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
