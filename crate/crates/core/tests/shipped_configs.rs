use hglp::harness::{run_experiment, ExperimentConfig, ExperimentKind};
use hglp::Error;

fn load(name: &str) -> ExperimentConfig {
    let path: std::path::PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name].iter().collect();
    ExperimentConfig::load(path).unwrap()
}

#[test]
fn every_shipped_config_validates() {
    let dir: std::path::PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs"].iter().collect();
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::load(&path).unwrap();
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 6);
}

#[test]
fn cheap_configs_pass() {
    for name in ["smoke.json", "scaling.json", "abelian_fuzz_subaveraging.json"] {
        let report = run_experiment(&load(name)).unwrap();
        assert!(report.all_pass(), "{name}: {}", report.summary());
    }
}

#[test]
fn equivalence_rejects_p_above_one() {
    let mut cfg = load("equivalence.json");
    assert_eq!(cfg.kind, ExperimentKind::Equivalence);
    cfg.p = vec![2.0];
    assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
}

#[test]
fn seeds_change_samples_but_not_verdicts() {
    let mut cfg = load("smoke.json");
    let a = run_experiment(&cfg).unwrap();
    cfg.seed += 1;
    let b = run_experiment(&cfg).unwrap();
    assert!(a.all_pass() && b.all_pass());
    assert_ne!(a.to_csv_string().unwrap(), b.to_csv_string().unwrap());
}
