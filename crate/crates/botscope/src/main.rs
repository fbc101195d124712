use std::process::ExitCode;

fn main() -> ExitCode {
    botscope::cli::run()
}
