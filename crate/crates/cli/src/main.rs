//! `geonoise`: sampling, geodesic and Brownian simulation, deformation and
//! training experiments driven by a flat config file.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::CliError;
use config::ConfigError;

#[derive(Debug, Parser)]
#[command(name = "geonoise", version, about = "Geometry-aware input noise experiments")]
struct Args {
    /// sample, geodesic, brownian, deform, train, table, sweep or check-reg.
    command: String,
    #[arg(long)]
    config: Option<PathBuf>,
    /// `key=value` override; repeatable and applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Number of points for `sample` and `deform`.
    #[arg(long)]
    n: Option<usize>,
}

fn overrides(args: &Args) -> Result<Vec<(String, String)>, CliError> {
    let mut out = vec![("command".to_string(), args.command.clone())];
    for s in &args.set {
        let (k, v) = s.split_once('=').ok_or_else(|| {
            CliError::Config(ConfigError::Validation {
                key: s.clone(),
                message: "--set expects key=value".into(),
            })
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    let flags = [
        ("out", args.out.clone()),
        ("format", args.format.clone()),
        ("seed", args.seed.map(|v| v.to_string())),
        ("jobs", args.jobs.map(|v| v.to_string())),
        ("sample.n", args.n.map(|v| v.to_string())),
    ];
    out.extend(flags.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))));
    Ok(out)
}

fn run(args: &Args) -> Result<(), CliError> {
    let text = match &args.config {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    let spec = config::parse_config(&text, &overrides(args)?)?;
    let art = commands::dispatch(&spec)?;
    output::write_atomic(&spec.out, &output::render(&spec, &art))?;
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {}: {msg}", e.kind());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
