use std::process::Command;

fn acaforge(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_acaforge")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into(), String::from_utf8_lossy(&out.stderr).into())
}

#[test]
fn check_212() {
    let (code, out, _) = acaforge(&["check", "212"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("commutative; monotonic; no-adjacent-active"));
}

#[test]
fn check_150_prints_witnesses() {
    let (_, out, _) = acaforge(&["check", "150"]);
    assert!(out.starts_with("not commutative; not monotonic; adjacent-active"));
    assert!(out.contains("commutativity witness"));
}

#[test]
fn nand_circuit() {
    let (code, out, err) = acaforge(&["circuit", "nand", "--inputs", "TT", "--schedules", "100", "--rule", "rule-x-held"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().next(), Some("output: F (unanimous across 100 schedules)"));
    let (_, out, _) = acaforge(&["circuit", "nand", "--inputs", "FT", "--schedules", "10", "--rule", "rule-x-held"]);
    assert!(out.starts_with("output: T"));
}

#[test]
fn literal_rule_x_nand_fails_loudly() {
    let (code, _, err) = acaforge(&["circuit", "nand", "--inputs", "TT", "--schedules", "6"]);
    assert_ne!(code, 0);
    assert!(err.contains("rule-x-held"), "{err}");
}

#[test]
fn compile_then_verify() {
    let dir = std::env::temp_dir().join(format!("acaforge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let m = dir.join("host.toml");
    let (code, out, err) = acaforge(&["compile", "110", "smv3q", "--out", m.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("6-state host"));
    let (code, out, err) = acaforge(&["verify", m.to_str().unwrap(), "--schedules", "3", "--steps", "10"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("3 of 3 schedules agree"));
    let (_, out, _) = acaforge(&["compile", "110", "smv3q"]);
    assert!(out.contains("host_states = 6"));
}

#[test]
fn oneway_report() {
    let (code, out, _) = acaforge(&["oneway", "xor1w", "--words", "1,10,011"]);
    assert_eq!(code, 0);
    assert!(out.contains("3/3 words equal"));
}

#[test]
fn run_prints_spacetime_and_writes_artifacts() {
    let (code, out, _) = acaforge(&["run", "--rule", "150", "--window=-4..4", "--steps", "2"]);
    assert_eq!(code, 0);
    assert!(out.contains("...111..."));
    let dir = std::env::temp_dir().join(format!("acaforge-run-{}", std::process::id()));
    let (code, _, err) =
        acaforge(&["run", "--rule", "212", "--init", "random:16:3", "--window", "0..15", "--seed", "4", "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    for f in ["spacetime.txt", "history.txt", "spacetime.png"] {
        assert!(dir.join(f).exists(), "{f}");
    }
}

#[test]
fn exports() {
    let dir = std::env::temp_dir().join(format!("acaforge-export-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let t = dir.join("rx.table");
    assert_eq!(acaforge(&["export", "table", "rule-x", t.to_str().unwrap()]).0, 0);
    assert!(std::fs::read_to_string(&t).unwrap().starts_with("@RULE rule-x"));
    let n = dir.join("nand.txt");
    assert_eq!(acaforge(&["export", "netlist", "nand", n.to_str().unwrap()]).0, 0);
    assert!(std::fs::read_to_string(&n).unwrap().contains("merge"));
    assert_ne!(acaforge(&["export", "bogus", "x", n.to_str().unwrap()]).0, 0);
}

#[test]
fn bad_rule_is_an_error() {
    let (code, _, err) = acaforge(&["check", "no-such-rule"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error:"));
}
