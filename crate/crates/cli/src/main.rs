use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use rescat_cli::{run, Cli, CliError};

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.output {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
        }
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(CliError::output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|text| emit(&cli, &text)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rescat: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
