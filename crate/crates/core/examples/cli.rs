//! Drives the command-line front end in-process, printing exit codes.

fn main() {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");
    let runs: Vec<Vec<String>> = vec![
        vec!["fg".into(), "--field".into(), format!("{data}/q3.json"), "--phi".into(), "mult".into(), "--prec".into(), "20".into()],
        vec!["herr".into(), format!("{data}/trivial.json"), "--degrees".into(), "0,1,2".into(), "--no-witnesses".into()],
        vec!["check".into(), format!("{data}/broken.json")],
        vec!["oracle-koszul".into(), format!("{data}/finite.json")],
    ];
    for args in runs {
        let argv = std::iter::once("ltpg".to_string()).chain(args.iter().cloned());
        let code = match <ltpg::cli::Cli as clap::Parser>::try_parse_from(argv) {
            Ok(c) => ltpg::cli::report(&c.command).0,
            Err(e) => {
                eprintln!("{e}");
                1
            }
        };
        println!("ltpg {} -> exit {code}", args.join(" "));
    }
}
