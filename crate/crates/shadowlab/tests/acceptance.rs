//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Runs every verification suite at full size (10⁵ Monte-Carlo samples,
//! 10⁴ snapshots per sweep point). Failing sub-checks are printed under
//! their criterion.

use shadowlab::suites::{run_suite, SuiteOptions};

const CRITERIA: [(usize, &str, &str); 10] = [
    (1, "channels-exact", "exact channel spectra by enumeration"),
    (2, "gt", "Gelfand-Tsetlin counterexample on End(V^[3,1,1])"),
    (3, "channels-mc", "Monte-Carlo channel spectra"),
    (4, "su2-tensor", "SU(2) tensor protocol end to end at n=4"),
    (5, "bounds", "variance bound ordering on the state grid"),
    (6, "tight-frame", "tight-frame identity"),
    (7, "htwirl", "dephasing equals the subgroup twirl"),
    (8, "table", "protocol summary table"),
    (9, "fig4", "variance scaling with system size"),
    (10, "determinism", "byte-identical reruns"),
];

fn main() {
    let opts = SuiteOptions { samples: 100_000, seed: 2024 };
    let mut failed = Vec::new();
    for (k, suite, what) in CRITERIA {
        let (pass, lines) = match run_suite(suite, &opts) {
            Ok(checks) => {
                let bad: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| format!("    {}", c.line())).collect();
                (bad.is_empty() && !checks.is_empty(), bad)
            }
            Err(e) => (false, vec![format!("    error: {e}")]),
        };
        println!("{} criterion {k:>2} [{suite}] {what}", if pass { "PASS" } else { "FAIL" });
        for l in &lines {
            println!("{l}");
        }
        if !pass {
            failed.push(k);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
