//! `wlab`: batch front end for Weingarten surface experiments.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use crate::config::RunContext;

#[derive(Parser, Debug)]
#[command(name = "wlab", version, about = "Numerical lab for elliptic Weingarten surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for result files (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed for randomized sampling; overrides the config value.
    #[arg(long)]
    seed: Option<u64>,
    /// Override a config value, `key.path=value`; the value is parsed as
    /// JSON and falls back to a string.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify ellipticity of a relation on a t grid.
    Certify(Common),
    /// Solve the Dirichlet problem for the graph equation.
    Solve(Common),
    /// Integrate a rotational profile.
    Revolve(Common),
    /// Build and classify a curvature diagram.
    Diagram(Common),
    /// Parallel surfaces and the conjugated relation.
    Parallel(Common),
    /// Linearized operator checks on cylinder patches.
    Linop(Common),
    /// Blow-up point selection and rescaling.
    Blowup(Common),
}

/// Process exit status of a completed run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    CertificationFailure,
    NotConverged,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::CertificationFailure => 2,
            Status::NotConverged => 3,
        }
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("WLAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .with_context(|| format!("WLAB_THREADS must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    configure_threads()?;
    let (name, common) = match &cli.command {
        Command::Certify(c) => ("certify", c),
        Command::Solve(c) => ("solve", c),
        Command::Revolve(c) => ("revolve", c),
        Command::Diagram(c) => ("diagram", c),
        Command::Parallel(c) => ("parallel", c),
        Command::Linop(c) => ("linop", c),
        Command::Blowup(c) => ("blowup", c),
    };
    let ctx = RunContext::load(name, &common.config, &common.out, common.seed, &common.overrides)?;
    match cli.command {
        Command::Certify(_) => commands::certify::run(&ctx),
        Command::Solve(_) => commands::solve::run(&ctx),
        Command::Revolve(_) => commands::revolve::run(&ctx),
        Command::Diagram(_) => commands::diagram::run(&ctx),
        Command::Parallel(_) => commands::parallel::run(&ctx),
        Command::Linop(_) => commands::linop::run(&ctx),
        Command::Blowup(_) => commands::blowup::run(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("wlab: error: {e:#}");
            ExitCode::from(1)
        }
    }
}
