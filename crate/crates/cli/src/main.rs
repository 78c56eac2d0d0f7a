use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(limbsys_cli::run(std::env::args_os()))
}
