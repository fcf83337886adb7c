//! Runs the built-in verification batteries and prints one line per item.

use ltpg::suite::{run_suite, SuiteOptions, SUITES};

fn main() -> ltpg::Result<()> {
    let opts = SuiteOptions { seed: 7, precision: 40, corrupt_differential: false };
    for name in SUITES {
        let rep = run_suite(name, &opts)?;
        for item in &rep.items {
            println!("{} {name}/{}", if item.pass { "PASS" } else { "FAIL" }, item.name);
        }
    }
    Ok(())
}
