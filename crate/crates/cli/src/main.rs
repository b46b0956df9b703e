use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tssp_cli::commands::{self, CliError, Globals};
use tssp_core::experiments::Axis;

#[derive(Parser)]
#[command(name = "tssp", version, about = "Time-splitting sine pseudospectral NLSE solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides TSSP_OUT_DIR and the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for random initial data and the self-test.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use the fine reference h = 2^-9, tau = 1e-6 (overnight runs).
    #[arg(long, global = true)]
    paper_scale: bool,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write a log-log SVG plot.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Time,
    Space,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured problem and write observables and the final state.
    Simulate,
    /// Run a temporal or spatial convergence sweep against a Strang reference.
    Converge {
        #[arg(long, value_enum)]
        axis: AxisArg,
    },
    /// Report observables of the initial datum or of a checkpoint.
    Observables {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Run the built-in property checks.
    Selftest {
        /// Scale regularization coefficient J by FACTOR (fault injection).
        #[arg(long, hide = true, value_name = "J:FACTOR")]
        corrupt_q: Option<String>,
    },
    /// Show or build cached reference solutions.
    Reference {
        #[arg(long)]
        build_cache: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let g = Globals {
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        paper_scale: cli.paper_scale,
        svg: cli.svg,
    };
    match cli.command {
        Command::Simulate => commands::simulate(&g),
        Command::Converge { axis } => commands::converge(
            &g,
            match axis {
                AxisArg::Time => Axis::Time,
                AxisArg::Space => Axis::Space,
            },
        ),
        Command::Observables { checkpoint } => commands::observables(&g, checkpoint.as_deref()),
        Command::Selftest { corrupt_q } => {
            let c = corrupt_q.as_deref().map(commands::parse_corruption).transpose()?;
            commands::selftest(&g, c)
        }
        Command::Reference { build_cache } => commands::reference(&g, build_cache),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tssp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
