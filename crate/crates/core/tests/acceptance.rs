//! Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
//!
//! `KVCERT_ONLY=4,9` restricts the run to the listed criteria.

use kvcert::cli::acceptance::{run_criterion, CRITERIA};
use kvcert::cli::RunConfig;

fn main() {
    let cfg = RunConfig::default();
    let ids: Vec<usize> = match std::env::var("KVCERT_ONLY") {
        Ok(list) => list
            .split(',')
            .map(|s| s.trim().parse().expect("criterion number"))
            .collect(),
        Err(_) => (1..=CRITERIA.len()).collect(),
    };
    let mut failed = Vec::new();
    for id in ids {
        let c = run_criterion(id, &cfg);
        println!("{}", c.line());
        if !c.pass() {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
