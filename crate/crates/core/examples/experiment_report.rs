//! Runs an experiment config and prints its CSV report.
//! `cargo run --release --example experiment_report -- configs/smoke.json`

use hglp::harness::{run_experiment, ExperimentConfig};

fn main() -> hglp::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::from_json(
            r#"{"id": "demo", "kind": "smoke", "group": "abelian:2", "grid": {"radius": 2.5, "points": 7}, "seed": 4}"#,
        )?,
    };
    let report = run_experiment(&cfg)?;
    report.write_csv(std::io::stdout().lock())?;
    eprintln!("{}", report.summary());
    std::process::exit(report.exit_code());
}
