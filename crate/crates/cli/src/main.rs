use std::process::ExitCode;

use clap::Parser;

use steerq_cli::args::Cli;
use steerq_cli::commands::run;
use steerq_cli::EXIT_USAGE;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&cli.command) {
        Ok(path) => {
            eprintln!("wrote {}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("steerq {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
