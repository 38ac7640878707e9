mod args;
mod commands;
mod error;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, RunConfig};
use error::{exit, CliError, Result};

/// Substitute a replayed configuration for the `replay` command.
fn resolve(cfg: RunConfig) -> Result<RunConfig> {
    let Command::Replay(a) = &cfg.command else {
        return Ok(cfg);
    };
    let saved: RunConfig = serde_json::from_str(&std::fs::read_to_string(&a.config)?)?;
    if matches!(saved.command, Command::Replay(_)) {
        return Err(CliError::Usage(
            "a saved configuration cannot be another replay".into(),
        ));
    }
    Ok(RunConfig {
        threads: cfg.threads.or(saved.threads),
        ..saved
    })
}

fn execute(cfg: RunConfig) -> Result<()> {
    let cfg = resolve(cfg)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Resource(format!("thread pool: {e}")))?;
    }
    match &cfg.command {
        Command::Prove(a) => commands::prove(a),
        Command::Gen(a) => commands::gen(a),
        Command::Pca(a) => commands::pca(a),
        Command::Svm(a) => commands::svm(a),
        Command::Nn(a) => commands::nn(a),
        Command::Predict(a) => commands::predict(a),
        Command::Replay(_) => unreachable!("resolved above"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(exit::USAGE as u8),
            };
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let cfg = RunConfig {
        threads: cli.threads,
        command: cli.command,
    };
    if let Some(path) = &cli.save_config {
        let saved = serde_json::to_string_pretty(&cfg)
            .map_err(CliError::from)
            .and_then(|s| {
                std::fs::write(path, s + "\n")?;
                Ok(())
            });
        if let Err(e) = saved {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    }
    match execute(cfg) {
        Ok(()) => ExitCode::from(exit::SUCCESS as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
