use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use edgewall::config::ConfigError;
use edgewall::run::{EXIT_CONFIG, EXIT_FAILURE};
use edgewall::{exit_code_for, parse_config, run, Command};

/// Edge domain walls in exchange-biased ferromagnetic strips.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// One of minimize, bifurcation, converge, bounds, strip2d-check, el-check.
    /// Optional when the configuration names the command.
    command: Option<String>,
    /// TOML run configuration.
    #[arg(short, long)]
    config: PathBuf,
    /// Overrides `output_dir` and the EDGEWALL_OUTPUT_DIR variable.
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
    /// Overrides the `threads` key.
    #[arg(short, long)]
    threads: Option<usize>,
}

fn execute(args: Args) -> anyhow::Result<i32> {
    let command = args.command.as_deref().map(str::parse::<Command>).transpose()?;
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))
        .map_err(|e| ConfigError(format!("{e:#}")))?;
    let mut cfg = parse_config(&text, command)?;
    if let Some(dir) = args.output_dir {
        cfg.output_dir = dir;
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build_global()
        .context("starting the worker pool")?;
    let outcome = run(&cfg)?;
    println!("{}", outcome.summary);
    for f in &outcome.files {
        println!("wrote {}", cfg.output_dir.join(f).display());
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match execute(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = exit_code_for(&e);
            ExitCode::from(if code == 0 { EXIT_FAILURE } else { code } as u8)
        }
    }
}
