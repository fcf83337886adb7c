//! Modules and reports as JSON: load the sample files next to this example
//! and render canonical reports, as the `ltpg` binary does.

use std::path::Path;

use ltpg::herr::{herr_cohomology, HerrOptions};
use ltpg::json::{herr_json, read_tagged, render, ModuleInput};

fn main() -> ltpg::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    for file in ["trivial.json", "ur2.json", "ur4_z9.json", "random_z9.json"] {
        let input: ModuleInput = read_tagged(&dir.join(file))?;
        let opts = HerrOptions { witnesses: false, ..Default::default() };
        let rep = herr_cohomology(&input, 40, &opts)?;
        let ring = input.base(40)?.ring.clone();
        let v = herr_json(&rep, &ring, false);
        println!(
            "{file}: divisors {}",
            v["degrees"].as_object().map(|d| d.values().map(|x| x["divisors"].to_string()).collect::<Vec<_>>().join(" ")).unwrap_or_default()
        );
    }
    let broken: ModuleInput = read_tagged(&dir.join("broken.json"))?;
    let failures = broken.build(20)?.check()?;
    print!("{}", render(&ltpg::json::to_value(&failures)));
    Ok(())
}
