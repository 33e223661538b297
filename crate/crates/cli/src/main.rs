use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(boxdual_cli::run(std::env::args_os()))
}
