use std::process::ExitCode;

use billiard_cli::{run, Cli, Failure, RunConfig, QUAD_N_ENV};
use clap::Parser;

fn execute(cli: Cli) -> Result<i32, Failure> {
    let out = cli.out.clone();
    let env = std::env::var(QUAD_N_ENV).ok();
    let config = RunConfig::from_cli(cli, env.as_deref())?;
    let outcome = run(&config)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    match out {
        Some(path) => std::fs::write(&path, &outcome.body)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{}", outcome.body),
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
