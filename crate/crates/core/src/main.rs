use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(ccr_core::cli::run(std::env::args_os()))
}
