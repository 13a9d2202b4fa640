use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(statel::cli::main_with(std::env::args_os()))
}
