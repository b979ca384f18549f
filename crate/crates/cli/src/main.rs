use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pass_cli::config::load_scenario;
use pass_cli::records::Format;
use pass_cli::{run, write_outputs, Experiment, RunError};

#[derive(Parser)]
#[command(name = "passcov", version, about = "Covert pinching-antenna experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detection error probability against the detection threshold
    DepCurve(Common),
    /// Worst-case detection error probability against jamming power
    DepVsJamming(Common),
    /// Average covert rate against covert power
    AcrCurve(Common),
    /// Optimizer study with grid and random baselines
    Optimize(Common),
    /// Monte Carlo cross-checks of the closed forms
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the config
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Jsonl,
}

fn execute(experiment: Experiment, args: &Common) -> Result<(), RunError> {
    let cfg = load_scenario(&args.config, args.seed)?;
    let outputs = run(experiment, &cfg)?;
    let format = match args.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Jsonl => Format::Jsonl,
    };
    write_outputs(&outputs, &args.out, format)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match &cli.command {
        Command::DepCurve(a) => (Experiment::DepCurve, a),
        Command::DepVsJamming(a) => (Experiment::DepVsJamming, a),
        Command::AcrCurve(a) => (Experiment::AcrCurve, a),
        Command::Optimize(a) => (Experiment::Optimize, a),
        Command::Validate(a) => (Experiment::Validate, a),
    };
    match execute(experiment, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
