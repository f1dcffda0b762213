use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use kacrice_cli::{CliError, ExperimentConfig, ExperimentKind, Format, Overrides, EXIT_INVALID};

#[derive(Parser)]
#[command(name = "kacrice", version, about = "Kac-Rice expected counts checked against Monte Carlo oracles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides KACRICE_SEED and the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Run the built-in invariant suite.
    Selfcheck,
    /// Run a continuity or degree sweep.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)?;
    ExperimentConfig::from_json(&text)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("KACRICE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("at `KACRICE_THREADS`: `{raw}` is not a positive integer")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("at `KACRICE_THREADS`: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    configure_threads()?;
    let env_seed = std::env::var("KACRICE_SEED").ok();
    match cli.command {
        Command::Run { config, seed, out, format } => {
            let cfg = load(&config)?;
            let ov = Overrides {
                seed,
                env_seed,
                out,
                format: format.map(|f| match f {
                    FormatArg::Csv => Format::Csv,
                    FormatArg::Json => Format::Json,
                }),
            };
            kacrice_cli::run(&cfg, &ov)
        }
        Command::Selfcheck => {
            let cfg = ExperimentConfig::new(ExperimentKind::Selfcheck);
            kacrice_cli::run(&cfg, &Overrides { env_seed, ..Overrides::default() })
        }
        Command::Sweep { config } => {
            let cfg = load(&config)?;
            if !cfg.experiment.is_sweep() {
                return Err(CliError::Validation(format!(
                    "at `experiment`: `{}` is not a sweep (use continuity_sweep or degree_sweep)",
                    cfg.experiment.name()
                )));
            }
            kacrice_cli::run(&cfg, &Overrides { env_seed, ..Overrides::default() })
        }
    }
}

fn main() -> ExitCode {
    let code = match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("kacrice: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(u8::try_from(code).unwrap_or(EXIT_INVALID as u8))
}
