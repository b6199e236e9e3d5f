use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fasmon::channel::MixingWeight;
use fasmon::expcli::{emit_csv, emit_svg, parse_config, run_experiment, validate, ValidationLevel};

const EXIT_VALIDATION: u8 = 4;

#[derive(Parser)]
#[command(name = "fasmon", version, about = "Fluid-antenna proactive monitoring experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep and write the results as CSV.
    Run {
        /// key = value or JSON configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override one configuration key; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Also write an SVG line chart.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Check the analytic results against independent oracles.
    Validate {
        /// 10^6 Monte Carlo draws and 200 random parameter sets.
        #[arg(long)]
        full: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Port model simulated by the Monte Carlo checks.
        #[arg(long, value_enum, default_value_t = Mixing::VariancePreserving)]
        mixing: Mixing,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mixing {
    VariancePreserving,
    Literal,
}

fn fail(e: fasmon::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, set, out, svg } => {
            let spec = match parse_config(config.as_deref(), &set) {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            let result = run_experiment(&spec);
            for f in &result.failures {
                eprintln!("error: {} at {} = {}: {}", f.scheme, spec.sweep_variable.name(), f.x_value, f.error);
            }
            if !result.rows.is_empty() {
                if let Err(e) = emit_csv(&result.rows, &out) {
                    return fail(e);
                }
                if let Some(path) = svg {
                    if let Err(e) = emit_svg(&result.rows, &path) {
                        return fail(e);
                    }
                }
            }
            match result.failures.first() {
                Some(f) => ExitCode::from(f.error.exit_code() as u8),
                None => {
                    eprintln!("wrote {} rows to {}", result.rows.len(), out.display());
                    ExitCode::SUCCESS
                }
            }
        }
        Command::Validate { full, seed, mixing } => {
            let level = if full { ValidationLevel::Full } else { ValidationLevel::Quick };
            let mixing = match mixing {
                Mixing::VariancePreserving => MixingWeight::VariancePreserving,
                Mixing::Literal => MixingWeight::Literal,
            };
            let report = match validate(seed, level, mixing) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            for c in &report.checks {
                println!("{} {}: {}", c.status(), c.name, c.detail);
            }
            match report.first_failure() {
                Some(c) => {
                    eprintln!("validation failed: {}", c.name);
                    ExitCode::from(EXIT_VALIDATION)
                }
                None => ExitCode::SUCCESS,
            }
        }
    }
}
