use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(cavity_cz::cli::run())
}
