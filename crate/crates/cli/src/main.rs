use std::process::ExitCode;

use clap::Parser;
use nfr_cli::{configure_threads, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let result = configure_threads(std::env::var("NFR_THREADS").ok().as_deref()).and_then(|()| run(&cli, &argv));
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nfr: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
