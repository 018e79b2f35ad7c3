use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qfock_cli::{render, report_exit_code, CliError, Report, RunConfig};

#[derive(Parser)]
#[command(
    name = "qfock",
    version,
    about = "q-deformed Araki-Woods Fock space laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    q: Option<f64>,
    #[arg(long, global = true)]
    truncation: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report destination; defaults to `report_path` from the config, then stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Run every verification suite.
    Verify,
    /// Moment table of a fixed-letter field.
    Moments {
        #[arg(long, default_value_t = 10)]
        n_max: usize,
    },
    /// Centralizer words per degree.
    Centralizer {
        /// Defaults to the truncation.
        #[arg(long)]
        max_degree: Option<usize>,
    },
    /// Type of the algebra from the rotation parameters.
    Classify,
    /// T-matrix diagnostics for word operators `x`, `y` against the masa of `xi0`.
    Mixing {
        #[arg(long, default_value_t = 0)]
        xi0: usize,
        /// Comma-separated letter indices.
        #[arg(long, default_value = "1")]
        x: String,
        #[arg(long, default_value = "1")]
        y: String,
    },
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let mut config = RunConfig::load(path)?;
    if let Some(q) = cli.q {
        config.q = q;
    }
    if let Some(d) = cli.truncation {
        config.truncation = d;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let config = load(cli)?;
    match &cli.command {
        Command::Verify => qfock_cli::cmd_verify(&config),
        Command::Moments { n_max } => qfock_cli::cmd_moments(&config, *n_max),
        Command::Centralizer { max_degree } => {
            qfock_cli::cmd_centralizer(&config, max_degree.unwrap_or(config.truncation))
        }
        Command::Classify => qfock_cli::cmd_classify(&config),
        Command::Mixing { xi0, x, y } => qfock_cli::cmd_mixing(
            &config,
            *xi0,
            &qfock_cli::parse_word(x)?,
            &qfock_cli::parse_word(y)?,
        ),
    }
}

fn emit(cli: &Cli, report: &Report) -> Result<(), CliError> {
    let text = match cli.format {
        Format::Json => report.to_json(),
        Format::Text => render::to_text(report),
    };
    match cli.out.as_ref().or(report.config.report_path.as_ref()) {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = run(&cli).and_then(|report| {
        emit(&cli, &report)?;
        Ok(report_exit_code(&report))
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("qfock: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
