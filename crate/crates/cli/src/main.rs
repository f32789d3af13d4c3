use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use sconv_cli::{run, seed_from_env, CliError, RunOptions, Scenario, Task};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Renyi,
    Hoeffding,
    NpSweep,
    ScReport,
    Ldp,
    Family,
    Verify,
}

impl Command {
    fn task(self) -> Task {
        match self {
            Command::Renyi => Task::Renyi,
            Command::Hoeffding => Task::Hoeffding,
            Command::NpSweep => Task::NpSweep,
            Command::ScReport => Task::ScReport,
            Command::Ldp => Task::Ldp,
            Command::Family => Task::Family,
            Command::Verify => Task::Verify,
        }
    }
}

/// Rényi divergences, Hoeffding anti-divergences and finite-size test
/// exponents from JSON scenario files.
///
/// Exit codes: 0 success, 1 invariant failure, 2 invalid input,
/// 3 runtime or resource failure. The seed comes from SCONV_SEED (default 42).
#[derive(Debug, Parser)]
#[command(name = "sconv", version)]
struct Cli {
    command: Command,
    /// Scenario JSON; `verify` runs with defaults when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output directory for CSV tables and summary.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Largest explicit Hilbert-space dimension.
    #[arg(long, default_value_t = sconv_cli::DEFAULT_DIM_CAP)]
    dim_cap: usize,
}

fn execute(cli: &Cli) -> Result<usize, CliError> {
    let seed = seed_from_env()?;
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    }
    let scenario = match &cli.scenario {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display()), None))?;
            Scenario::parse(&text)?
        }
        None if matches!(cli.command, Command::Verify) => Scenario::parse(r#"{"task": "verify"}"#)?,
        None => return Err(CliError::validation("--scenario is required for this command", None)),
    };
    if scenario.task != cli.command.task() {
        return Err(CliError::validation(
            format!("scenario is for task {} but the command is {}", scenario.task.name(), cli.command.task().name()),
            Some("/task"),
        ));
    }
    let opts = RunOptions { out_dir: cli.out.clone(), dim_cap: cli.dim_cap, seed };
    let out = run(&scenario, &opts)?;
    for f in &out.files {
        println!("{}", f.display());
    }
    if let Some(p) = out.summary.get("passed") {
        println!("passed {p}, failed {}", out.failures);
    }
    Ok(out.failures)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
