//! `qcar`: simulate, tune and compare fuzzy suspension controllers.

use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(qcar_cli::run(
        std::env::args_os(),
        &mut std::io::stdout().lock(),
    ))
}
