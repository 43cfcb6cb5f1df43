use std::process::ExitCode;

use clap::Parser;
use embrel::cli::{self, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let result = cli::run(Cli::parse());
    match &result {
        Ok(summary) => print!("{summary}"),
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(cli::exit_code(&result))
}
