use std::path::PathBuf;
use std::process::ExitCode;

use ader_entropy::cli_io::{self, exit_code, RunConfig};
use ader_entropy::{problems, Error, Result};
use clap::{Args, Parser, Subcommand};

/// FV-ADER solver with per-cell numerical entropy production.
#[derive(Parser)]
#[command(name = "ader-entropy", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Problem name (see list-problems); shorthand for run.problem.
    #[arg(short, long)]
    problem: Option<String>,
    /// p0p1, p0p2 or rk3; shorthand for run.scheme.
    #[arg(short, long)]
    scheme: Option<String>,
    /// Override any key, e.g. --set run.cfl=0.4 --set adaptivity.enabled=true
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one simulation and write snapshots.
    Run(Common),
    /// Dyadic convergence table against the exact solution.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Grid sizes per axis.
        #[arg(long, value_delimiter = ',', default_value = "64,128,256,512")]
        grids: Vec<usize>,
        /// Write the table here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Histogram of |S| over a (coarse) run, to pick S_ref.
    EntropyHistogram(Common),
    /// Print the full configuration with the problem's defaults.
    Defaults {
        #[arg(short, long, default_value = "sod_1d")]
        problem: String,
    },
    /// List the catalogued problems.
    ListProblems,
}

fn config(c: &Common) -> Result<RunConfig> {
    let mut sets = Vec::new();
    let base = match (&c.config, &c.problem) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(p)) => RunConfig::for_problem(p).map_err(|_| {
            Error::Config(format!("unknown problem '{p}'; valid problems: {}", problems::names().join(", ")))
        })?,
        (None, None) => return Err(Error::Config("give --config or --problem".into())),
    };
    if c.config.is_some() {
        if let Some(p) = &c.problem {
            sets.push(format!("run.problem=\"{p}\""));
        }
    }
    if let Some(s) = &c.scheme {
        sets.push(format!("run.scheme=\"{s}\""));
    }
    sets.extend(c.sets.iter().cloned());
    base.with_overrides(&sets)
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Run(c) => {
            let cfg = config(&c)?;
            let plan = cfg.resolve()?;
            let summary = cli_io::run(&cfg)?;
            print!("{}", summary.to_text(&plan));
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
        }
        Cmd::Converge { common, grids, output } => {
            let report = cli_io::converge(&config(&common)?, &grids)?;
            let text = report.to_csv();
            match output {
                Some(p) => std::fs::write(p, text)?,
                None => print!("{text}"),
            }
        }
        Cmd::EntropyHistogram(c) => {
            let h = cli_io::entropy_histogram(&config(&c)?)?;
            print!("{}", h.to_text());
        }
        Cmd::Defaults { problem } => {
            let cfg = RunConfig::for_problem(&problem).map_err(|_| {
                Error::Config(format!(
                    "unknown problem '{problem}'; valid problems: {}",
                    problems::names().join(", ")
                ))
            })?;
            print!("{}", cfg.to_text());
        }
        Cmd::ListProblems => print!("{}", cli_io::problem_table()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
