use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hepp_expand::{load_scenario, run, CliError, Command, MethodChoice, Options};

#[derive(Parser)]
#[command(name = "hepp-expand", version, about = "Wick-symbol expansions of quadratically evolved observables")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the classical flow and report φ(t,0) samples
    Flow(Args),
    /// Run the Dyson and/or exponential expansion
    Expand(Args),
    /// Compare the expansion with the truncated Fock-space evolution
    Oracle(Args),
    /// Monte-Carlo sweep of the norm inequalities
    Estimates(Args),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Dyson,
    Exp,
    Both,
}

#[derive(clap::Args)]
struct Args {
    scenario: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    method: MethodArg,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on it)
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HEPP_LOG", "warn")).init();
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Flow(a) => (Command::Flow, a),
        Cmd::Expand(a) => (Command::Expand, a),
        Cmd::Oracle(a) => (Command::Oracle, a),
        Cmd::Estimates(a) => (Command::Estimates, a),
    };
    match execute(command, &args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command, args: &Args) -> Result<u8, CliError> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Invalid(format!("--threads: {e}")))?;
    }
    let scenario = load_scenario(&args.scenario)?;
    let method = match args.method {
        MethodArg::Dyson => MethodChoice::Dyson,
        MethodArg::Exp => MethodChoice::Exp,
        MethodArg::Both => MethodChoice::Both,
    };
    let opts = Options { method, samples: args.samples, seed: args.seed };
    let outcome = run(command, &scenario, &opts)?;
    let text = serde_json::to_string_pretty(&outcome.report)?;
    match &args.out {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|source| CliError::Io { path: path.display().to_string(), source })?,
        None => println!("{text}"),
    }
    if outcome.status != hepp_expand::Status::Pass {
        log::warn!("{} failed its tolerance", args.scenario.display());
    }
    Ok(outcome.status.exit_code() as u8)
}
