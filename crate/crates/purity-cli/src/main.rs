//! Batch front-end: state ingestion, subcommand dispatch, machine-readable
//! reports to stdout or --out.
//!
//! Exit codes: 0 success, 2 validation error (including malformed input
//! JSON, with location), 3 tractability guard exceeded, 4 optimizer
//! non-convergence (the report is still emitted).

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use purity::io;
use purity::povm_opt::{OptimizerConfig, RankOnePovm};
use purity::protocol::DistillationParams;
use purity::Error;
use purity_cli::report::{self, RunReport};

#[derive(Parser)]
#[command(
    name = "purity",
    about = "Operational purity measures and distillation protocols on explicit states",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Omit wall-clock timing so identical reruns are byte-identical.
    #[arg(long, global = true)]
    no_timing: bool,

    /// Optimizer gradient tolerance.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Von Neumann entropies (and mutual information for bipartite input).
    Entropy {
        #[arg(long)]
        state: PathBuf,
    },
    /// Local purity kappa = log2 d - H.
    Kappa {
        #[arg(long)]
        state: PathBuf,
    },
    /// One-shot deficit: max over rank-1 POVMs on A of I(X;B).
    Deficit {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 250)]
        max_iters: usize,
        /// POVM outcome count (default d^2).
        #[arg(long)]
        outcomes: Option<usize>,
    },
    /// Finite-n level of the one-way local purity.
    Kappa1way {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 250)]
        max_iters: usize,
    },
    /// Build a purity concentration code for n copies.
    Concentrate {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Build a covering code for the ensemble encoded by a block-diagonal
    /// bipartite state.
    Cover {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the six-step distillation protocol on a classical-classical state.
    Distill {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rank-1 POVM file; default is the computational basis.
        #[arg(long)]
        povm: Option<PathBuf>,
        /// Split dA = a1 * a2 with concentration on A1 and measurement on A2.
        #[arg(long)]
        a1_dim: Option<usize>,
    },
    /// Distill one pbit from a shared random bit.
    Example1,
    /// Check additivity of the deficit against a maximally mixed spectator.
    Additivity {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 150)]
        max_iters: usize,
    },
    /// Batch-verify the distance and entropy inequalities.
    IneqSuite {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        instances: usize,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::GuardExceeded(_) => 3,
        _ => 2,
    }
}

fn load(path: &PathBuf) -> Result<(io::LoadedState, String), Error> {
    let bytes = std::fs::read(path)?;
    let digest = report::digest_bytes(&bytes);
    let text = String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    let state = io::parse_state(&text)?;
    Ok((state, digest))
}

fn optimizer(seed: u64, restarts: usize, max_iters: usize, outcomes: Option<usize>, tol: f64) -> OptimizerConfig {
    let mut cfg = OptimizerConfig::seeded(seed)
        .with_restarts(restarts)
        .with_max_iters(max_iters);
    cfg.outcomes = outcomes;
    cfg.grad_tol = tol;
    cfg
}

fn run(cli: &Cli) -> Result<(RunReport, bool), Error> {
    let mut converged = true;
    let report = match &cli.command {
        Command::Entropy { state } => {
            let (s, digest) = load(state)?;
            report::entropy_report(&s, digest)
        }
        Command::Kappa { state } => {
            let (s, digest) = load(state)?;
            report::kappa_report(&s, digest)
        }
        Command::Deficit { state, seed, restarts, max_iters, outcomes } => {
            let (s, digest) = load(state)?;
            let cfg = optimizer(*seed, *restarts, *max_iters, *outcomes, cli.tol);
            let (rep, ok) = report::deficit_report(s.bipartite()?, digest, &cfg)?;
            converged = ok;
            rep
        }
        Command::Kappa1way { state, n, seed, restarts, max_iters } => {
            let (s, digest) = load(state)?;
            let cfg = optimizer(*seed, *restarts, *max_iters, None, cli.tol);
            let (rep, ok) = report::kappa1way_report(s.bipartite()?, digest, *n, &cfg)?;
            converged = ok;
            rep
        }
        Command::Concentrate { state, n, delta } => {
            let (s, digest) = load(state)?;
            report::concentrate_report(&s, digest, *n, *delta)?
        }
        Command::Cover { state, n, epsilon, delta, seed } => {
            let (s, digest) = load(state)?;
            report::cover_report(s.bipartite()?, digest, *n, *epsilon, *delta, *seed)?
        }
        Command::Distill { state, n, epsilon, delta, seed, povm, a1_dim } => {
            let (s, digest) = load(state)?;
            let mut params = DistillationParams::new(*n, *epsilon, *delta, *seed);
            params.a1_dim = *a1_dim;
            let measurement = match povm {
                Some(path) => {
                    let text = std::fs::read_to_string(path)?;
                    let vectors = io::parse_povm_vectors(&text)?;
                    Some(RankOnePovm::new(vectors)?)
                }
                None => None,
            };
            report::distill_report(s.bipartite()?, digest, &params, measurement)?
        }
        Command::Example1 => report::example1_report(),
        Command::Additivity { state, seed, restarts, max_iters } => {
            let (s, digest) = load(state)?;
            let cfg = optimizer(*seed, *restarts, *max_iters, None, cli.tol);
            report::additivity_report(s.bipartite()?, digest, &cfg)?
        }
        Command::IneqSuite { seed, instances } => report::ineq_suite_report(*seed, *instances),
    };
    Ok((report, converged))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok((mut report, converged)) => {
            if !cli.no_timing {
                report = report.with_timing(start.elapsed().as_millis());
            }
            let text = match cli.format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
            };
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                println!("{text}");
            }
            if converged { ExitCode::SUCCESS } else { ExitCode::from(4) }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
