use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use wpcn_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = cli.resolve().and_then(|(cmd, cfg)| run(cmd, &cfg, cli.out.as_deref()));
    match outcome {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report.document).expect("document serializes");
            // a closed pipe on stdout is not a failure of the run
            let _ = writeln!(std::io::stdout(), "{text}");
            if report.infeasible {
                eprintln!("no feasible decision");
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("wpcn: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
