use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use cu_lab::cli::{run, Cli, RunConfig};

fn main() -> ExitCode {
    let out = run(&RunConfig::from(Cli::parse()));
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    ExitCode::from(out.code)
}
