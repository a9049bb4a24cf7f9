use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn mabac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mabac")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn run_to(config: &str, dir: &Path) -> Output {
    mabac(&[
        "run",
        "--config",
        scenario(config).to_str().unwrap(),
        "--export",
        dir.to_str().unwrap(),
    ])
}

#[test]
fn alice_run_is_granted() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_to("alice.json", dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("Granted"));
    for f in ["trace.json", "ledger.jsonl", "costs.txt"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
}

#[test]
fn bob_run_is_denied_and_still_exports() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_to("bob.json", dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).starts_with("Denied at step 6"));
    assert!(dir.path().join("trace.json").is_file());
}

#[test]
fn missing_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = mabac(&[
        "run",
        "--config",
        "/nonexistent.json",
        "--export",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
}

#[test]
fn invalid_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(&config, r#"{"actors":[],"policy":"*","shared_data":{"text":"x"}}"#).unwrap();
    let out = mabac(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--export",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exports_round_trip_through_audit_and_costs() {
    let dir = tempfile::tempdir().unwrap();
    run_to("two_authorities.json", dir.path());
    let ledger = dir.path().join("ledger.jsonl");
    let trace = dir.path().join("trace.json");
    let out = mabac(&[
        "audit",
        "--ledger",
        ledger.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!((out.status.code(), stdout(&out).trim()), (Some(0), "Intact"));
    let out = mabac(&["costs", "--trace", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        std::fs::read_to_string(dir.path().join("costs.txt")).unwrap()
    );
}

#[test]
fn hand_edited_ledger_is_broken() {
    let dir = tempfile::tempdir().unwrap();
    run_to("alice.json", dir.path());
    let ledger = dir.path().join("ledger.jsonl");
    let text = std::fs::read_to_string(&ledger).unwrap();
    std::fs::write(&ledger, text.replacen("\"amount_wei\":0", "\"amount_wei\":1", 1)).unwrap();
    let out = mabac(&["audit", "--ledger", ledger.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).starts_with("BrokenAt("));
}

#[test]
fn tip_edit_needs_the_anchor() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_to("alice.json", dir.path());
    let tip = stdout(&run)
        .lines()
        .find_map(|l| l.strip_prefix("ledger tip: "))
        .unwrap()
        .to_string();
    let ledger = dir.path().join("ledger.jsonl");
    let text = std::fs::read_to_string(&ledger).unwrap();
    let last = text.lines().last().unwrap();
    let edited = last.replacen("\"timestamp\":75", "\"timestamp\":76", 1);
    assert_ne!(edited, last);
    std::fs::write(&ledger, text.replacen(last, &edited, 1)).unwrap();
    let path = ledger.to_str().unwrap();
    assert_eq!(mabac(&["audit", "--ledger", path]).status.code(), Some(0));
    let out = mabac(&["audit", "--ledger", path, "--tip", &tip]);
    assert_eq!((out.status.code(), stdout(&out).trim()), (Some(3), "BrokenAt(5)"));
}

#[test]
fn audit_rejects_empty_and_foreign_files() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(
        mabac(&["audit", "--ledger", empty.to_str().unwrap()]).status.code(),
        Some(1)
    );
    let foreign = dir.path().join("notes.txt");
    std::fs::write(&foreign, "hello\n").unwrap();
    assert_eq!(
        mabac(&["audit", "--ledger", foreign.to_str().unwrap()]).status.code(),
        Some(1)
    );
    let missing = dir.path().join("missing.jsonl");
    assert_eq!(
        mabac(&["audit", "--ledger", missing.to_str().unwrap()]).status.code(),
        Some(1)
    );
}

#[test]
fn costs_at_zero_rate_and_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    run_to("alice.json", dir.path());
    let trace = dir.path().join("trace.json");
    let out = mabac(&["costs", "--trace", trace.to_str().unwrap(), "--usd-per-ether", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for line in text
        .lines()
        .filter(|l| l.contains(" (C)") || l.contains(" (F)") || l.contains("Total"))
    {
        assert!(line.trim_end().ends_with("0.000 |"), "{line}");
    }
    let out = mabac(&["costs", "--trace", trace.to_str().unwrap(), "--usd-per-ether", "lots"]);
    assert_eq!(out.status.code(), Some(1));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{}").unwrap();
    assert_eq!(
        mabac(&["costs", "--trace", bad.to_str().unwrap()]).status.code(),
        Some(1)
    );
}

#[test]
fn policy_command() {
    let dir = tempfile::tempdir().unwrap();
    let policy = dir.path().join("notes.policy");
    std::fs::write(&policy, "AA_UD:UD\nAA_UD:PhD Student\nGender*\n").unwrap();
    let p = policy.to_str().unwrap();
    let out = mabac(&["policy", "--policy", p, "--attributes", "UD,PhD Student,Female"]);
    assert_eq!((out.status.code(), stdout(&out).trim()), (Some(0), "SATISFIED"));
    let out = mabac(&["policy", "--policy", p, "--attributes", "UD,Master Student,Male"]);
    assert_eq!((out.status.code(), stdout(&out).trim()), (Some(4), "NOT SATISFIED"));
    let out = mabac(&["policy", "--policy", p, "--attributes", "UD,PhD Student"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("positions"));
}

#[test]
fn unknown_flags_are_errors() {
    assert_eq!(mabac(&["run", "--bogus"]).status.code(), Some(1));
    assert_eq!(mabac(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(mabac(&["--help"]).status.code(), Some(0));
}
