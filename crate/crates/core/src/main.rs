use bergkit::cli::{configure_threads, execute, Cli, EXIT_CONFIG};
use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap uses 2 for usage errors; 2 is reserved for unbounded symbols here
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let code = configure_threads().and_then(|()| execute(&cli, &mut std::io::stdout().lock()));
    match code {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("bergkit: {e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
