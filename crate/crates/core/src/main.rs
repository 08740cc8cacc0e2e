use std::io::Write;

use clap::Parser;
use qss_core::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let (code, report) = run(&cli);
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    // A closed pipe is not worth a panic; the exit status still reports.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    std::process::exit(code);
}
