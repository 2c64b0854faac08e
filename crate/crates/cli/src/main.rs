use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use symplab_cli::{list_experiments, load_config, run, split_pair, CliError, EXIT_ERROR};

#[derive(Parser)]
#[command(name = "symplab", version, about = "Entropy and periodic-exponent experiments on area-preserving maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run {
        /// Experiment name; falls back to the `experiment` config key.
        experiment: Option<String>,
        /// Flat key = value file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "symplab-out")]
        out: PathBuf,
        /// Override a config key; later wins.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// List registered experiments.
    List,
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::List => {
            for (name, description) in list_experiments() {
                println!("{name}\t{description}");
            }
            Ok(0)
        }
        Command::Run {
            experiment,
            config,
            out,
            set,
        } => {
            let mut given = match &config {
                Some(path) => load_config(path)?,
                None => BTreeMap::new(),
            };
            for pair in &set {
                let (k, v) = split_pair(pair)
                    .ok_or_else(|| CliError::Config(format!("--set expects key=value, got '{pair}'")))?;
                given.insert(k, v);
            }
            let name = experiment
                .or_else(|| given.get("experiment").cloned())
                .ok_or(CliError::MissingExperiment)?;
            let report = run(&name, &given, &out)?;
            for c in &report.checks {
                println!(
                    "{} {} ({} {} {})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.relation,
                    c.threshold
                );
            }
            println!("report: {}", out.join("report.json").display());
            Ok(report.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
