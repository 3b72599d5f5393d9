use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rpn_shoot_cli::{cmd_scan, cmd_solve, cmd_verify, Outcome, Overrides, RunConfig, EXIT_FAILURE, SEED_ENV};

/// Shooting-method solver for radial prescribed scalar curvature on RP^n.
#[derive(Parser)]
#[command(name = "rpn-shoot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan G(λ), refine the first root, certify it and export the global solution.
    Solve(RunArgs),
    /// Tabulate G(λ) over the configured grid.
    Scan(RunArgs),
    /// Run the invariant suite and write report.json.
    Verify(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    lambda_min: Option<f64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Worker threads for the λ scan.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn load(&self) -> anyhow::Result<RunConfig> {
        let overrides = Overrides {
            n: self.n,
            lambda_min: self.lambda_min,
            lambda_max: self.lambda_max,
            points: self.points,
            out: self.out.clone(),
        };
        let seed = std::env::var(SEED_ENV).ok();
        RunConfig::load(&self.config, &overrides)?.with_seed_from(seed.as_deref())
    }

    fn jobs(&self) -> usize {
        self.jobs
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, run): (&RunArgs, fn(&RunConfig, usize) -> anyhow::Result<Outcome>) = match &cli.command {
        Command::Solve(a) => (a, cmd_solve),
        Command::Scan(a) => (a, cmd_scan),
        Command::Verify(a) => (a, cmd_verify),
    };
    match args.load().and_then(|cfg| run(&cfg, args.jobs())) {
        Ok(outcome) => {
            if outcome.code == 0 {
                println!("{}", outcome.summary);
            } else {
                eprintln!("{}", outcome.summary);
            }
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
