use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use loanopt::problems::{ModelKind, RiskMeasure};
use loanopt::report::{self, CommandOutput, RunConfig, Slice, DEFAULT_SURVIVAL_K, EXIT_CONFIG};

#[derive(Parser)]
#[command(
    name = "loanopt",
    version,
    about = "Loan-portfolio selection with and without limited liability"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration.
    config: PathBuf,
    /// Output directory; overrides the config's output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Multistart seed; overrides solver.seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one model (P1..P4).
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: ModelKind,
    },
    /// Compare each model with its limited-liability counterpart.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Risk over the weight triangle of a three-loan universe.
    Surface {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "EL")]
        measure: RiskMeasure,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Plain and limited-liability returns along fixed-weight slices.
    Profiles {
        #[command(flatten)]
        common: Common,
        /// Capital level; defaults to the config's k_lev.
        #[arg(long)]
        k: Option<f64>,
        /// Slice such as x=0.05 or y=0.1; repeatable.
        #[arg(long)]
        slice: Vec<Slice>,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Worst-case net value of single-loan and grid portfolios per capital level.
    Survival {
        #[command(flatten)]
        common: Common,
        /// Comma-separated capital levels.
        #[arg(long, value_delimiter = ',')]
        k_values: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
}

fn load(common: &Common) -> loanopt::Result<(RunConfig, PathBuf)> {
    let mut cfg = RunConfig::from_path(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.solver.seed = seed;
    }
    let out = common.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    Ok((cfg, out))
}

fn run(cmd: Command) -> loanopt::Result<CommandOutput> {
    match cmd {
        Command::Solve { common, model } => {
            let (cfg, out) = load(&common)?;
            report::cmd_solve(&cfg, model, &out)
        }
        Command::Compare { common } => {
            let (cfg, out) = load(&common)?;
            report::cmd_compare(&cfg, &out)
        }
        Command::Surface {
            common,
            measure,
            step,
        } => {
            let (cfg, out) = load(&common)?;
            report::cmd_surface(&cfg, measure, step, &out)
        }
        Command::Profiles {
            common,
            k,
            slice,
            step,
        } => {
            let (cfg, out) = load(&common)?;
            let k = k.unwrap_or(cfg.params.k_lev);
            report::cmd_profiles(&cfg, k, &slice, step, &out)
        }
        Command::Survival {
            common,
            k_values,
            step,
        } => {
            let (cfg, out) = load(&common)?;
            let k_values = k_values.unwrap_or_else(|| DEFAULT_SURVIVAL_K.to_vec());
            report::cmd_survival(&cfg, &k_values, step, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(output) => {
            print!("{}", output.text);
            if output.infeasible {
                eprintln!("error: no feasible point found");
            }
            ExitCode::from(output.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(report::exit_code(&e) as u8)
        }
    }
}
