use std::process::ExitCode;

use clap::Parser;
use twisted_conv::cli::{execute, output_path, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 4 } else { 0 });
        }
    };
    let outcome = match execute(&cli.command) {
        Ok(outcome) => outcome,
        Err(e) => {
            eprintln!("twconv: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match output_path(&cli.command) {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &outcome.json) {
                eprintln!("twconv: {}: {e}", path.display());
                return ExitCode::from(4);
            }
        }
        None => print!("{}", outcome.json),
    }
    ExitCode::from(outcome.exit_code as u8)
}
