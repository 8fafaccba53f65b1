use std::process::ExitCode;

fn main() -> ExitCode {
    miqp_ald::cli::main_with_args(std::env::args_os())
}
