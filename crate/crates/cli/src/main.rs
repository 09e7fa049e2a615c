use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use spinbath_cli::{execute, CliError, Mode, RunConfig};

#[derive(Parser)]
#[command(
    name = "spinbath",
    version,
    about = "Spin chains coupled to harmonic baths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one mode and write its outputs.
    Run {
        mode: Mode,
        /// JSON config file, or a preset name (fig1, fig2, fig3, unitary).
        #[arg(long)]
        config: PathBuf,
        /// Overrides n_samples.
        #[arg(long)]
        samples: Option<usize>,
        /// Overrides seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let Command::Run {
        mode,
        config,
        samples,
        seed,
        out,
    } = cli.command;
    let mut cfg = RunConfig::load(&config)?;
    if let Some(m) = samples {
        cfg.n_samples = m;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let start = Instant::now();
    let summary = execute(mode, &cfg, &out)?;
    for line in &summary.lines {
        println!("{line}");
    }
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    println!("elapsed: {:.1} s", start.elapsed().as_secs_f64());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
