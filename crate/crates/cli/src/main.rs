use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use fbl_eee_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let text = report.table.to_csv();
    let written = match &cli.output {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(1);
    }
    if let Some(reason) = report.infeasible {
        eprintln!("infeasible: {reason}");
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
