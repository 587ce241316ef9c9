//! `opnorm`: estimate operator norms of black-box linear maps and reproduce
//! the library's benchmark experiments as CSV artifacts.
//!
//! Exit codes: 0 on tolerance-met or orthogonal-detected, 1 on invalid input,
//! 2 when the iteration budget ran out (the estimate is still printed).

mod experiments;
mod ops;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use opnorm::sampling::RngStream;
use opnorm::solver::{
    detect_orthogonal, run, run_deflated, write_trace_csv, Init, Mode, RunConfig, Termination,
};
use ops::OperatorArgs;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "opnorm", about = "Matrix- and adjoint-free operator norm estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the extreme singular value of one operator.
    Estimate(EstimateArgs),
    /// Run a named experiment and write its CSV artifacts.
    Experiment(ExperimentArgs),
    /// Probe whether the operator satisfies A*A = cI.
    DetectOrthogonal(DetectArgs),
    /// Estimate the K leading singular values by deflation.
    Topk(TopkArgs),
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Iteration budget; defaults to 50 times the input dimension.
    #[arg(long)]
    max_iters: Option<usize>,

    /// Stopping tolerance for the resampled residual check.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,

    /// Fresh directions per stopping check.
    #[arg(long, default_value_t = 10)]
    resamples: usize,

    /// Start vector: "uniform" (random on the sphere) or "ones".
    #[arg(long, default_value = "uniform")]
    init: String,

    /// "max" for the largest singular value, "min" for the smallest.
    #[arg(long, default_value = "max")]
    mode: String,
}

impl SolverArgs {
    fn config(&self) -> Result<RunConfig> {
        let init = match self.init.as_str() {
            "uniform" => Init::Uniform,
            "ones" => Init::Ones,
            other => bail!("unknown init {other:?} (expected uniform or ones)"),
        };
        let mode = match self.mode.as_str() {
            "max" => Mode::Max,
            "min" => Mode::Min,
            other => bail!("unknown mode {other:?} (expected max or min)"),
        };
        Ok(RunConfig {
            max_iters: self.max_iters,
            eps: self.eps,
            resamples: self.resamples,
            init,
            mode,
            ..Default::default()
        })
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    operator: OperatorArgs,
    #[command(flatten)]
    solver: SolverArgs,

    /// Write the per-iteration trace CSV to this file.
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// One of: rotation-table, shear2x2, disk-diag, row-vector, gaussian-grid,
    /// projector-demo.
    name: String,

    #[arg(long, default_value_t = 10)]
    runs: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output directory for the CSV artifacts (created if missing).
    #[arg(long, default_value = "opnorm-out")]
    out: PathBuf,

    /// Grid side length override for rotation-table.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    operator: OperatorArgs,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value_t = 10)]
    probes: usize,

    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct TopkArgs {
    #[command(flatten)]
    operator: OperatorArgs,
    #[command(flatten)]
    solver: SolverArgs,

    /// Number of leading singular values.
    #[arg(long, default_value_t = 2)]
    k: usize,
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors by default; 2 means budget-exhausted
    // here, so route bad flags to exit 1 like every other invalid input
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let benign = matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return ExitCode::from(if benign { 0 } else { 1 });
        }
    };
    let outcome = match cli.command {
        Command::Estimate(args) => cmd_estimate(&args),
        Command::Experiment(args) => experiments::dispatch(&args.name, &args).map(|()| 0),
        Command::DetectOrthogonal(args) => cmd_detect_orthogonal(&args).map(|()| 0),
        Command::Topk(args) => cmd_topk(&args).map(|()| 0),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn cmd_estimate(args: &EstimateArgs) -> Result<u8> {
    let op = args.operator.build()?;
    let cfg = args.solver.config()?;
    let mut rng = RngStream::from_seed(args.solver.seed);
    let report = run(op.as_ref(), &cfg, &mut rng)?;

    println!("estimate: {}", report.norm_estimate);
    println!("termination: {}", report.termination);
    println!("oracle calls: {}", report.oracle_calls);
    if matches!(report.termination, Termination::OrthogonalDetected) {
        println!("c: {}", report.norm_estimate * report.norm_estimate);
    }
    if let Some(path) = &args.trace {
        let file = File::create(path)?;
        write_trace_csv(&report.trace, BufWriter::new(file))?;
    }
    Ok(match report.termination {
        Termination::ToleranceMet | Termination::OrthogonalDetected => 0,
        Termination::BudgetExhausted => 2,
    })
}

fn cmd_detect_orthogonal(args: &DetectArgs) -> Result<()> {
    let op = args.operator.build()?;
    let mut rng = RngStream::from_seed(args.seed);
    let verdict = detect_orthogonal(op.as_ref(), &mut rng, args.probes, args.tol)?;
    if verdict.detected {
        println!("detected, c = {}", verdict.c_estimate);
    } else {
        println!("not detected (after {} probes)", verdict.probes_used);
    }
    Ok(())
}

fn cmd_topk(args: &TopkArgs) -> Result<()> {
    let op = args.operator.build()?;
    let cfg = args.solver.config()?;
    let mut rng = RngStream::from_seed(args.solver.seed);
    let triplets = run_deflated(op.as_ref(), &cfg, &mut rng, args.k)?;
    let mut worst_dot: f64 = 0.0;
    for (i, (sigma, _)) in triplets.iter().enumerate() {
        println!("sigma[{}]: {sigma}", i + 1);
    }
    for i in 0..triplets.len() {
        for j in (i + 1)..triplets.len() {
            let d: f64 = triplets[i]
                .1
                .iter()
                .zip(&triplets[j].1)
                .map(|(a, b)| a * b)
                .sum();
            worst_dot = worst_dot.max(d.abs());
        }
    }
    println!("max pairwise |<v_i,v_j>|: {worst_dot}");
    Ok(())
}
