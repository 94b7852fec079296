use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ulab::lab::{self, Report, Scenario, ScenarioKind};
use ulab::{Error, Result};

#[derive(Parser)]
#[command(name = "ulab", version, about = "Numerical checks for unconditional integration, positive-type functions and dual actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and print its report.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one scenario kind with parameters from the command line.
    Verify(VerifyArgs),
    /// List bundle fixtures, built-in instances and scenario kinds.
    ListFixtures {
        /// Directory of additional bundle fixture files.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
    /// Show the certificate or failure for a built-in instance.
    Demo {
        #[command(subcommand)]
        what: Demo,
    },
}

#[derive(Args)]
struct VerifyArgs {
    kind: String,
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    bundle: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    window: Option<i64>,
    #[arg(long)]
    example: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Demo {
    Unconditional {
        #[arg(long, default_value = "basis-over-n")]
        example: String,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn emit(report: &Report, out: Option<&Path>) -> Result<ExitCode> {
    let json = report.to_json();
    match out {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    for c in report.failures() {
        eprintln!("FAIL {}: abs_err {:e} > tol {:e}", c.name, c.abs_err, c.tol);
    }
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { scenario, out } => {
            let text = std::fs::read_to_string(&scenario)
                .map_err(|e| Error::Validation(format!("{}: {e}", scenario.display())))?;
            let report = lab::run(&Scenario::from_json(&text)?)?;
            emit(&report, out.as_deref())
        }
        Command::Verify(a) => {
            let scenario = Scenario {
                id: None,
                kind: Some(a.kind.parse::<ScenarioKind>()?),
                group: a.group,
                dim: a.dim,
                bundle: a.bundle,
                trials: a.trials,
                seed: a.seed,
                tol: a.tol,
                eps: a.eps,
                window: a.window,
                example: a.example,
            };
            emit(&lab::run(&scenario)?, a.out.as_deref())
        }
        Command::ListFixtures { dir } => {
            println!("{}", lab::list_fixtures(dir.as_deref()).to_json());
            Ok(ExitCode::SUCCESS)
        }
        Command::Demo { what: Demo::Unconditional { example, eps, seed } } => {
            print!("{}", lab::demo_unconditional(&example, eps, seed)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
