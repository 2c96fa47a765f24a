use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use costep_cli::commands::{cmd_list, cmd_predict, cmd_run};
use costep_cli::CliResult;

/// Co-simulation experiments with duplicated-state discrepancy analysis.
///
/// Output goes to --out DIR if given, otherwise to a per-experiment
/// directory under $COSTEP_OUT (default: costep-out).
#[derive(Parser)]
#[command(name = "costep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a built-in experiment or a TOML config file.
    Run {
        /// Built-in name (see `list`) or path to a config file.
        experiment: String,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Predict the discrepancy from sampled flows in a CSV with a `t` column.
    Predict {
        flow_csv: PathBuf,
        /// Column holding the flow samples.
        #[arg(long, default_value = "q", value_name = "COLUMN")]
        flow: String,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// List the built-in experiments.
    List,
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Run { experiment, out } => {
            let report = cmd_run(&experiment, out.as_deref())?;
            for (k, v) in &report.summary {
                println!("{k} = {v}");
            }
            println!("wrote {}", report.dir.display());
        }
        Command::Predict {
            flow_csv,
            flow,
            out,
        } => {
            let report = cmd_predict(&flow_csv, &flow, out.as_deref())?;
            println!("final_predicted_leading = {}", report.final_leading);
            println!("final_predicted_regrouped = {}", report.final_regrouped);
            println!("wrote {}", report.path.display());
        }
        Command::List => print!("{}", cmd_list()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
