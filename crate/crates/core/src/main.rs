use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use bogospec::cli::{commands::execute, load_config, Command, OutputFormat, EXIT_CONFIG};

/// Bogoliubov spectra of mean-field Bose gases, checked against a torus
/// closed form and exact diagonalization.
#[derive(Parser, Debug)]
#[command(name = "bogospec", version)]
struct Args {
    /// validate, hartree, spectrum, bdg, torus-oracle, ed-compare or sweep
    command: String,
    #[arg(long)]
    config: PathBuf,
    /// Overrides output.dir
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv, json or both; overrides output.format
    #[arg(long)]
    format: Option<String>,
}

fn run(args: Args) -> Result<(), bogospec::cli::CliError> {
    let cmd = Command::parse(&args.command)
        .ok_or_else(|| bogospec::cli::CliError::config(format!("unknown command {:?}", args.command)))?;
    let mut cfg = load_config(&args.config)?;
    if let Some(dir) = args.out {
        cfg.out_dir = dir;
    }
    if let Some(f) = args.format {
        cfg.format = OutputFormat::parse(&f)
            .ok_or_else(|| bogospec::cli::CliError::config(format!("--format: expected csv, json or both, got {f:?}")))?;
    }
    for path in execute(cmd, &cfg)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
