use std::io;
use std::process::ExitCode;

use clap::Parser;
use hanfuse::cli::{run, Cli};

fn main() -> ExitCode {
    let verbose = Cli::try_parse().map_or(0, |c| c.global.verbose);
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let code = run(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}
