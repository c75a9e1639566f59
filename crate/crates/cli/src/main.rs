//! `einstein-forge`: verify metrics, solve and classify the ODE families,
//! run the catalog and emit profile data.

mod commands;
mod report;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use commands::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let timing = cli.timing;
    let start = Instant::now();
    match commands::run(cli.command) {
        Ok(mut out) => {
            if timing {
                out.report.timing_s = Some(start.elapsed().as_secs_f64());
            }
            let json = serde_json::to_string_pretty(&out.report).expect("report serializes");
            // a closed pipe (e.g. `| head`) is not an error of the run
            let _ = writeln!(std::io::stdout().lock(), "{json}");
            eprintln!("{}", out.message);
            if out.report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
