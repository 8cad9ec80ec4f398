mod args;
mod commands;
mod input;

use std::io::Write;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use incompat_core::sdp::SdpOptions;
use serde::Serialize;
use serde_json::Value;

use args::{Cli, Format};
use input::{CliError, InputRecord};

const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Report<'a> {
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    /// Seconds since the Unix epoch; the only field that varies between reruns.
    timestamp: u64,
    sdp_options: &'a SdpOptions,
    inputs: Vec<InputRecord>,
    parameters: Value,
    result: Value,
}

fn sdp_options(cli: &Cli) -> SdpOptions {
    let mut o = SdpOptions::default();
    if let Some(v) = cli.gap_tol {
        o.gap_tol = v;
    }
    if let Some(v) = cli.residual_tol {
        o.residual_tol = v;
    }
    if let Some(v) = cli.feas_tol {
        o.feas_tol = v;
    }
    if let Some(v) = cli.sdp_max_iters {
        o.max_iters = v;
    }
    o
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| CliError::Input(format!("--jobs: {e}")))?;
    }
    let opts = sdp_options(cli);
    let command = commands::name(&cli.command);
    log::info!("running {command} with seed {}", cli.seed);
    let outcome = commands::run(&cli.command, cli.seed, &opts)?;
    let text = match cli.format {
        Format::Json => {
            let report = Report {
                schema_version: SCHEMA_VERSION,
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                command,
                seed: cli.seed,
                timestamp: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                sdp_options: &opts,
                inputs: outcome.inputs,
                parameters: outcome.parameters,
                result: outcome.result,
            };
            serde_json::to_string_pretty(&report).expect("report serialises") + "\n"
        }
        Format::Text => {
            let mut lines = vec![format!("{command} (seed {})", cli.seed)];
            for i in &outcome.inputs {
                lines.push(format!(
                    "{}: {} [sha256 {}]",
                    i.role,
                    i.source,
                    &i.sha256[..16]
                ));
            }
            lines.extend(outcome.summary);
            lines.join("\n") + "\n"
        }
    };
    match &cli.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
