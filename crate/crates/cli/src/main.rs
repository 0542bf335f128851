//! `genp`: residual experiments, verification suites, instance generation
//! and preconditioned solves.
//!
//! Exit codes: 0 when every verdict passes, 1 when a verification or a
//! solve fails, 2 on a usage or input error.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use genp_core::dense::text::{read_matrix, write_matrix};
use genp_core::harness::{
    check_finite_set_singularity, check_perturbation_bound, check_spectral_bounds, check_tail_bounds, emit_report,
    run_residual_experiment, verify_safety, verify_schur_algebra, ExperimentConfig, Method, ReportFormat, Tabular,
    DEFAULT_DIMS, MIN_TAIL_SAMPLES,
};
use genp_core::pipeline::{preconditioned_solve, Multiplier, PreconditionPlan};
use genp_core::randgen::{FiniteSet, Seed};
use genp_core::testgen::{hard_matrix, DEFAULT_NULLITY};
use genp_core::RealMatrix;

const DEFAULT_SEED: &str = "2024";
/// Trials at n = 1024 unless `--trials` says otherwise.
const LARGE_TRIALS: usize = 10;

#[derive(Parser, Debug)]
#[command(name = "genp", version, about = "Gaussian elimination with no pivoting, stabilised by random multipliers")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Master seed, decimal or 0x-prefixed hex.
    #[arg(long, global = true, default_value = DEFAULT_SEED)]
    seed: Seed,
    /// Trial count; each subcommand has its own default.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Comma-separated orders, default 64,256.
    #[arg(long, global = true, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// csv, markdown or json.
    #[arg(long, global = true, default_value = "markdown")]
    format: ReportFormat,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for experiments; 0 picks the core count.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Relative residuals on hard instances, one row per order and refinement count.
    Experiment(ExperimentArgs),
    /// Run a verification suite.
    #[command(subcommand)]
    Verify(Suite),
    /// Write a hard instance in the text matrix format.
    Generate(GenerateArgs),
    /// Solve `A x = b` with a preconditioning plan and print the outcome.
    Solve(SolveArgs),
}

#[derive(Args, Debug)]
struct PlanArgs {
    /// none, gaussian, circulant, toeplitz, hankel or finite-set.
    #[arg(long, default_value = "gaussian")]
    left: Multiplier,
    /// Same choices as `--left`.
    #[arg(long, default_value = "none")]
    right: Multiplier,
    /// Refinement steps after the first solve.
    #[arg(long, default_value_t = 0)]
    refine: usize,
}

impl PlanArgs {
    fn plan(&self) -> PreconditionPlan {
        PreconditionPlan::new(self.left.clone(), self.right.clone()).with_refinement(self.refine)
    }
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// gepp, genp or preconditioned.
    #[arg(long, default_value = "preconditioned")]
    method: Method,
    #[command(flatten)]
    plan: PlanArgs,
    /// Nullity of the leading half block.
    #[arg(long, default_value_t = DEFAULT_NULLITY)]
    nullity: usize,
    /// Add n = 1024 (ten trials unless --trials is given).
    #[arg(long)]
    large: bool,
}

#[derive(Subcommand, Debug)]
enum Suite {
    /// Singular-value bounds for F A and A H, interlacing, perturbation.
    Spectral {
        #[arg(long, default_value_t = 12)]
        max_size: usize,
    },
    /// Monte Carlo tail bounds for Gaussian matrices.
    Tails,
    /// Exact singularity frequencies over a finite set of integers.
    FiniteSet {
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Entry range `lo..hi` (inclusive) or a comma list.
        #[arg(long, default_value = "0..9")]
        set: String,
    },
    /// Pivot, inverse and growth bounds on G^T G + I.
    Safety {
        #[arg(long, default_value_t = 16)]
        n: usize,
    },
    /// Perturbation bound for the inverse.
    Perturbation {
        #[arg(long, default_value_t = 12)]
        max_size: usize,
    },
    /// Schur complement schedule invariance, nesting and determinants.
    Schur {
        #[arg(long, default_value_t = 16)]
        n: usize,
    },
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Order of the instance; must be even.
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Nullity of the leading half block.
    #[arg(long, default_value_t = DEFAULT_NULLITY)]
    nullity: usize,
    /// Where to write the right-hand side as an n x 1 matrix.
    #[arg(long)]
    rhs_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Square matrix in the text format.
    #[arg(long)]
    matrix: PathBuf,
    /// Right-hand side as an n x 1 matrix.
    #[arg(long)]
    rhs: PathBuf,
    #[command(flatten)]
    plan: PlanArgs,
    /// Emit the outcome as JSON.
    #[arg(long)]
    json: bool,
    /// Include the solution vector in the output.
    #[arg(long)]
    emit_solution: bool,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Verdict,
    Usage(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<genp_core::Error> for Failure {
    fn from(e: genp_core::Error) -> Self {
        Failure::Usage(e.into())
    }
}

fn output(global: &Global) -> anyhow::Result<Box<dyn Write>> {
    Ok(match &global.out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn emit<T: Tabular>(global: &Global, report: &T) -> Result<(), Failure> {
    let mut out = output(global)?;
    emit_report(report, global.format, &mut out)?;
    out.flush().context("flushing report")?;
    Ok(())
}

fn verdict(passed: bool) -> Result<(), Failure> {
    if passed {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn parse_set(s: &str) -> anyhow::Result<FiniteSet> {
    let set = if let Some((lo, hi)) = s.split_once("..") {
        FiniteSet::range(lo.trim().parse()?, hi.trim().parse()?)?
    } else {
        let values = s.split(',').map(|v| v.trim().parse::<i64>()).collect::<Result<Vec<_>, _>>()?;
        FiniteSet::new(values)?
    };
    Ok(set)
}

fn experiment(global: &Global, args: &ExperimentArgs) -> Result<(), Failure> {
    let mut dims = global.dims.clone().unwrap_or_else(|| DEFAULT_DIMS.to_vec());
    let mut trials = global.trials.unwrap_or(100);
    if args.large {
        dims.push(1024);
        trials = global.trials.unwrap_or(LARGE_TRIALS);
    }
    let config = ExperimentConfig {
        dims,
        trials,
        nullity: args.nullity,
        workers: global.workers,
        ..ExperimentConfig::new(args.method, args.plan.plan(), global.seed.master)
    };
    let report = run_residual_experiment(&config)?;
    emit(global, &report)
}

fn verify(global: &Global, suite: &Suite) -> Result<(), Failure> {
    let seed = global.seed;
    match suite {
        Suite::Spectral { max_size } => {
            let r = check_spectral_bounds(seed, global.trials.unwrap_or(1000), *max_size)?;
            emit(global, &r)?;
            verdict(r.passed)
        }
        Suite::Tails => {
            let r = check_tail_bounds(seed, global.trials.unwrap_or(MIN_TAIL_SAMPLES))?;
            emit(global, &r)?;
            verdict(r.passed)
        }
        Suite::FiniteSet { k, set } => {
            let delta = parse_set(set)?;
            let r = check_finite_set_singularity(seed, *k, &delta, global.trials.unwrap_or(100_000))?;
            emit(global, &r)?;
            verdict(r.passed)
        }
        Suite::Safety { n } => {
            let r = verify_safety(seed, global.trials.unwrap_or(100), *n)?;
            emit(global, &r)?;
            verdict(r.passed)
        }
        Suite::Perturbation { max_size } => {
            let r = check_perturbation_bound(seed, global.trials.unwrap_or(1000), *max_size)?;
            emit(global, &r)?;
            verdict(r.passed)
        }
        Suite::Schur { n } => {
            let r = verify_schur_algebra(seed, global.trials.unwrap_or(200), *n)?;
            emit(global, &r)?;
            verdict(r.passed)
        }
    }
}

fn write_instance(path: Option<&Path>, header: &str, m: &RealMatrix) -> anyhow::Result<()> {
    let mut out: Box<dyn Write> = match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(out, "{header}")?;
    write_matrix(&mut out, m)?;
    out.flush()?;
    Ok(())
}

fn generate(global: &Global, args: &GenerateArgs) -> Result<(), Failure> {
    let inst = hard_matrix(global.seed, args.n, args.nullity)?;
    let header = format!(
        "# seed={} stream={} n={} h={} attempt={}",
        global.seed.master, global.seed.stream, inst.n, inst.h, inst.record.attempt
    );
    write_instance(global.out.as_deref(), &header, &inst.matrix)?;
    if let Some(p) = &args.rhs_out {
        write_instance(Some(p), &header, &RealMatrix::column_vector(&inst.rhs))?;
    }
    Ok(())
}

fn load(path: &Path) -> anyhow::Result<RealMatrix> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_matrix(BufReader::new(f)).with_context(|| format!("cannot parse {}", path.display()))
}

fn solve(global: &Global, args: &SolveArgs) -> Result<(), Failure> {
    let a = load(&args.matrix)?;
    let rhs = load(&args.rhs)?;
    if rhs.cols() != 1 && rhs.rows() != 1 {
        return Err(anyhow!("right-hand side must be a vector, got {:?}", rhs.shape()).into());
    }
    let b = rhs.into_vec();
    let outcome = match preconditioned_solve(&a, &b, &args.plan.plan(), global.seed) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("genp: {e}");
            return Err(Failure::Verdict);
        }
    };
    let mut out = output(global)?;
    if args.json {
        let mut value = serde_json::to_value(&outcome).context("serialising outcome")?;
        if !args.emit_solution {
            value.as_object_mut().expect("struct serialises to an object").remove("solution");
        }
        serde_json::to_writer_pretty(&mut out, &value).context("writing outcome")?;
        writeln!(out).context("writing outcome")?;
    } else {
        writeln!(out, "plan {} seed {}", args.plan.plan().label(), global.seed).context("writing outcome")?;
        writeln!(out, "relative residual {:.3e}", outcome.relative_residual).context("writing outcome")?;
        let history: Vec<String> = outcome.residual_history.iter().map(|r| format!("{r:.3e}")).collect();
        writeln!(out, "history {}", history.join(" ")).context("writing outcome")?;
        if args.emit_solution {
            let xs: Vec<String> = outcome.solution.iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "solution {}", xs.join(" ")).context("writing outcome")?;
        }
    }
    out.flush().context("writing outcome")?;
    if outcome.failure.is_some() {
        return Err(Failure::Verdict);
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if cli.global.dims.as_ref().is_some_and(|d| d.is_empty()) {
        return Err(anyhow!("--dims needs at least one order").into());
    }
    match &cli.command {
        Command::Experiment(args) => experiment(&cli.global, args),
        Command::Verify(suite) => verify(&cli.global, suite),
        Command::Generate(args) => generate(&cli.global, args),
        Command::Solve(args) => solve(&cli.global, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("genp: {e:#}");
            ExitCode::from(2)
        }
    }
}
