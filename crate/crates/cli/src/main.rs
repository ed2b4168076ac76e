use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    // Let clap handle --help and --version itself.
    if let Err(e) = mmc_cli::Cli::try_parse_from(std::env::args()) {
        if !e.use_stderr() {
            e.exit();
        }
    }
    match mmc_cli::run(&argv) {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.report).expect("serializable");
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::from(outcome.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("mmc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
