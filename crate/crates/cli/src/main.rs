#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use report::{CliError, Context, Outcome};

fn dispatch(ctx: &mut Context, command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Transform(t) => commands::transform(ctx, t),
        Command::Convolve(c) => commands::convolve_cmd(ctx, c),
        Command::Fractional(f) => commands::fractional(ctx, f),
        Command::Solve(s) => commands::solve_cmd(ctx, s),
        Command::ProbeUniqueness(p) => commands::probe(ctx, p),
        Command::Fixtures(f) => commands::fixtures(ctx, f),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start the thread pool: {e}");
            return ExitCode::from(1);
        }
    };
    let command = format!("{:?}", cli.command);
    let start = Instant::now();
    let mut ctx = Context::new(cli.format, &command);
    let outcome = pool.install(|| dispatch(&mut ctx, &cli.command));
    if let Err(e) = &outcome {
        eprintln!("error: {e}");
    }
    let report = ctx.finish(command, pool.current_num_threads(), outcome, start.elapsed().as_secs_f64() * 1e3);
    let code = report.exit_code;
    let text = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
    match &cli.report {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(4);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(code as u8)
}
