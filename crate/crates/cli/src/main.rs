use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    match roy_cli::run_from_args(std::env::args_os()) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            let _ = std::io::stdout().flush();
            match outcome.failure {
                Some(e) => {
                    for d in &outcome.diagnostics {
                        eprintln!("{d}");
                    }
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
                None => {
                    for d in &outcome.diagnostics {
                        eprintln!("warning: {d}");
                    }
                    ExitCode::SUCCESS
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
