//! `thermolens` command-line tool.
//!
//! Every output starts with a `# thermolens <version> <config>` line holding
//! the effective configuration as JSON. Exit status is 0 on success, 2 for
//! invalid arguments and 1 for failures while reading data or computing.

mod args;
mod run;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

fn fail(code: u8, msg: &str) -> ExitCode {
    let line = msg.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("error: {line}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let head = text.split("\n\n").next().unwrap_or("invalid arguments");
            return fail(2, head.trim_start_matches("error:").trim());
        }
    };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n as usize);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => return fail(1, &format!("cannot start worker pool: {e}")),
    };

    match pool.install(|| run::run(&cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.exit_code() as u8, &e.to_string()),
    }
}
