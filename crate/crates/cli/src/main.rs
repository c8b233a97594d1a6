use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use npick_cli::{emit, run, Cli, EXIT_INPUT};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let report = json!({"error": {"kind": "input", "message": e.kind().to_string()}});
            println!("{}", npick::json::to_string(&report));
            let _ = e.print();
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let outcome = run(&cli);
    ExitCode::from(emit(&cli, &outcome))
}
