use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use peskin_core::cli::{self, Suite};
use peskin_core::io::load_config;

#[derive(Parser)]
#[command(name = "peskin", version, about = "Spectral boundary-integral solver for the 2-D Peskin problem")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config and write the series and checkpoints.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the diagnostics of a checkpoint.
    Diagnose {
        #[arg(long)]
        curve: PathBuf,
    },
    /// Run a config and check it against the monotonicity, decay, geometric
    /// and consistency properties.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        /// Write the checks as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compare the full solver with the tangential model on circular data.
    CompareTangential {
        #[arg(long)]
        config: PathBuf,
    },
    /// Temporal and spatial self-convergence tables.
    Converge {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Monotone,
    Decay,
    Geometry,
    Consistency,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Monotone => Suite::Monotone,
            SuiteArg::Decay => Suite::Decay,
            SuiteArg::Geometry => Suite::Geometry,
            SuiteArg::Consistency => Suite::Consistency,
            SuiteArg::All => Suite::All,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let mut out = std::io::stdout().lock();
    let outcome = match args.command {
        Command::Simulate { config, out: dir } => {
            load_config(&config).and_then(|c| cli::cmd_simulate(&c, dir.as_deref(), &mut out))
        }
        Command::Diagnose { curve } => cli::cmd_diagnose(&curve, &mut out),
        Command::Verify { config, suite, report } => {
            load_config(&config).and_then(|c| cli::cmd_verify(&c, suite.into(), report.as_deref(), &mut out))
        }
        Command::CompareTangential { config } => load_config(&config).and_then(|c| cli::cmd_compare_tangential(&c, &mut out)),
        Command::Converge { config } => load_config(&config).and_then(|c| cli::cmd_converge(&c, &mut out)),
    };
    if let Err(e) = &outcome {
        eprintln!("error: {e}");
    }
    ExitCode::from(cli::exit_code(&outcome) as u8)
}
