use std::process::Command;

fn hglp(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_hglp")).args(args).output().unwrap()
}

fn configs() -> std::path::PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs"].iter().collect()
}

#[test]
fn validate_group_prints_csv_and_passes() {
    let out = hglp(&["validate-group", "heisenberg"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("experiment,tag,quantity,lhs,rhs,ratio,constant,threshold,criterion,pass"));
    assert!(text.contains("group-axioms"));
}

#[test]
fn unknown_names_are_config_errors() {
    assert_eq!(hglp(&["validate-group", "nope"]).status.code(), Some(2));
    assert_eq!(hglp(&["fuzz", "--kind", "e9", "--n", "10"]).status.code(), Some(2));
    assert_eq!(hglp(&["run", "--config", "/nonexistent.json"]).status.code(), Some(2));
}

#[test]
fn fuzz_writes_the_requested_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e4.csv");
    let out = hglp(&["fuzz", "--kind", "e4", "--n", "20000", "--seed", "7", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.contains("elementary-inequality"));
}

#[test]
fn failing_rows_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.json");
    // a threshold no residual can meet
    std::fs::write(
        &cfg,
        r#"{"id": "strict", "kind": "reproduce", "group": "abelian:1", "pair": "dgauss:1|dgauss:1",
            "grid": {"radius": 4.0, "points": 41}, "scales": {"octaves": 5, "per_octave": 4},
            "family": {"dilations": [1.0, 0.8, 1.25]}, "threshold": 1e-9}"#,
    )
    .unwrap();
    let out = hglp(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn smoke_config_is_byte_identical_across_runs() {
    let cfg = configs().join("smoke.json");
    let a = hglp(&["run", "--config", cfg.to_str().unwrap()]);
    let b = hglp(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn square_functions_accept_a_kernel_as_input() {
    for cmd in ["gfun", "area", "dsq"] {
        let out = hglp(&[cmd, "--group", "abelian:2", "--kernel", "dgauss:2,0", "--in", "dgauss:1,1", "--points", "9"]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        assert_eq!(text.lines().count(), 1 + 81, "{cmd}");
    }
}
