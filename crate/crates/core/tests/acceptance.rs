//! Acceptance report: one PASS/FAIL line per check against the default
//! parameter set. Checks listed in `KNOWN_GAPS` are reproducible
//! discrepancies with the published figures; they still print FAIL but do
//! not fail the target. Any other FAIL does.

use std::process::ExitCode;

use smib::cli::{verify, Workbench};
use smib::config::Config;

const KNOWN_GAPS: [&str; 3] = [
    "L'_d from inductances",
    "LTR truth OP II V_t steady-state error",
    "LTR truth OP II delta error",
];

fn main() -> ExitCode {
    let wb = Workbench::new(Config::default()).expect("default configuration");
    let report = verify(&wb);
    print!("{}", report.to_text());
    let unexpected: Vec<_> = report.failures().filter(|c| !KNOWN_GAPS.contains(&c.name.as_str())).collect();
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        for c in &unexpected {
            eprintln!("unexpected failure: {c}");
        }
        ExitCode::FAILURE
    }
}
