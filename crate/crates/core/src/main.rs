use std::process::ExitCode;

use laplace_pin::cli::{run, Outcome};

fn main() -> ExitCode {
    match run(std::env::args_os()) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
