//! End-to-end tests driving the compiled binary.

use std::path::Path;
use std::process::{Command, Output};

fn hkscan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hkscan"))
        .args(args)
        .env_remove("HKSCAN_COST_CEILING")
        .output()
        .expect("binary runs")
}

fn hkscan_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hkscan"))
        .args(args)
        .current_dir(dir)
        .env_remove("HKSCAN_COST_CEILING")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn eval_examples() {
    let out = hkscan(&["eval", "H", "--n", "5", "--k", "4", "--exact"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "355\n");

    let out = hkscan(&["eval", "U", "--n", "4", "--k", "2", "--mod"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "2 (mod 4)\n");

    let out = hkscan(&["eval", "V", "--k", "2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "-1\n");

    let out = hkscan(&["eval", "S", "--n", "5", "--k", "4"]);
    assert_eq!(stdout(&out), "354\n");

    let out = hkscan(&["eval", "fW", "--n", "6"]);
    assert_eq!(stdout(&out), "121\n");

    let out = hkscan(&["eval", "fG", "--n", "5", "--mod"]);
    assert_eq!(stdout(&out), "4 (mod 5)\n");
}

#[test]
fn eval_domain_violations_exit_3() {
    // k out of range on the modular path
    assert_eq!(code(&hkscan(&["eval", "H", "--n", "5", "--k", "9", "--mod"])), 3);
    // missing required argument
    assert_eq!(code(&hkscan(&["eval", "S", "--n", "5"])), 3);
    // V has no modular path
    assert_eq!(code(&hkscan(&["eval", "V", "--k", "2", "--mod"])), 3);
    // fW below domain
    assert_eq!(code(&hkscan(&["eval", "fW", "--n", "1"])), 3);
    // unknown flag is a usage error
    assert_eq!(code(&hkscan(&["eval", "H", "--n", "5", "--wat"])), 3);
}

#[test]
fn check_confirmed_claim_exits_0() {
    let out = hkscan(&["check", "--claims", "lemma-u1", "--n-max", "1000"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("confirmed-on-range"), "{text}");
    assert!(text.contains("pairs checked: 998"), "{text}");
}

#[test]
fn check_under_test_finding_exits_1() {
    let out = hkscan(&["check", "--claims", "thm-ukz", "--n-max", "50"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("verdict: violated"), "{text}");
    assert!(
        text.contains("thm-ukz n=4 k=2: observed 2 (mod 4), expected 0 (mod 4)"),
        "{text}"
    );
}

#[test]
fn check_unknown_claim_exits_3() {
    let out = hkscan(&["check", "--claims", "no-such-claim", "--n-max", "50"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown claim"));
}

#[test]
fn check_all_on_degenerate_range_exits_0() {
    let out = hkscan(&["check", "--claims", "all", "--n-max", "2"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("skipped: 1"), "skip notes expected: {text}");
}

#[test]
fn check_json_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u1.json");
    let out = hkscan(&[
        "check",
        "--claims",
        "lemma-u1",
        "--n-max",
        "200",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["format_version"], 1);
    assert_eq!(value["payload"]["kind"], "claim_report");
    assert_eq!(value["payload"]["data"]["claim"], "lemma-u1");
    assert_eq!(value["payload"]["data"]["verdict"], "confirmed-on-range");
}

#[test]
fn check_csv_export_has_exact_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ukz.csv");
    let out = hkscan(&[
        "check",
        "--claims",
        "thm-ukz",
        "--n-max",
        "30",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "claim_id,n,k,observed,expected,path");
    assert_eq!(
        lines.next().unwrap(),
        "thm-ukz,4,2,2 (mod 4),0 (mod 4),modular"
    );
}

#[test]
fn scan_giuga_small_census() {
    let out = hkscan(&["scan-giuga", "--max", "100"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("prime satisfiers: 25"), "{text}");
    assert!(text.contains("composite satisfiers G(x): 0"), "{text}");

    assert_eq!(code(&hkscan(&["scan-giuga", "--max", "2"])), 3);
}

#[test]
fn scan_giuga_worker_counts_agree_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let run = |path: &Path, workers: &str| {
        let out = hkscan(&[
            "scan-giuga",
            "--max",
            "2000",
            "--workers",
            workers,
            "--format",
            "json",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
    };
    run(&a, "1");
    run(&b, "8");
    let va: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&a).unwrap()).unwrap();
    let vb: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&b).unwrap()).unwrap();
    assert_eq!(va["payload"], vb["payload"]);
    assert_eq!(
        serde_json::to_string(&va["payload"]).unwrap(),
        serde_json::to_string(&vb["payload"]).unwrap()
    );
}

#[test]
fn scan_giuga_checkpoint_resume() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("census.ckpt");
    let out_full = dir.path().join("full.json");
    let out = hkscan(&[
        "scan-giuga",
        "--max",
        "1500",
        "--chunk-size",
        "50",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        out_full.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);

    // drop the second half of the completed chunks, then resume
    let text = std::fs::read_to_string(&ckpt).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let keep = 1 + (lines.len() - 1) / 2;
    std::fs::write(&ckpt, lines[..keep].join("\n") + "\n").unwrap();

    let out_resumed = dir.path().join("resumed.json");
    let out = hkscan(&[
        "resume",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        out_resumed.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let full: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_full).unwrap()).unwrap();
    let resumed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_resumed).unwrap()).unwrap();
    assert_eq!(full["payload"], resumed["payload"]);
}

#[test]
fn check_checkpoint_and_resume_claim_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("ukz.ckpt");
    let out_full = dir.path().join("full.json");
    let out = hkscan(&[
        "check",
        "--claims",
        "thm-ukz",
        "--n-max",
        "150",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        out_full.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let text = std::fs::read_to_string(&ckpt).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let keep = 1 + (lines.len() - 1) / 2;
    std::fs::write(&ckpt, lines[..keep].join("\n") + "\n").unwrap();

    let out_resumed = dir.path().join("resumed.json");
    let out = hkscan(&[
        "resume",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        out_resumed.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1, "resume reproduces the finding exit code");

    let full: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_full).unwrap()).unwrap();
    let resumed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_resumed).unwrap()).unwrap();
    assert_eq!(full["payload"], resumed["payload"]);

    // a checkpoint is tied to one claim at a time
    let out = hkscan(&[
        "check",
        "--claims",
        "thm-ukz,lemma-u1",
        "--checkpoint",
        ckpt.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn observe_subset_confirms() {
    let out = hkscan(&["observe", "--n-max", "100"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("confirmed-on-range"));
}

#[test]
fn observe_writes_json_that_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("obs.json");
    let out = hkscan(&[
        "observe",
        "--n-max",
        "80",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(value["payload"]["data"]["claim"], "conj-hk");
}

#[test]
fn list_claims_prints_catalog() {
    let out = hkscan(&["list-claims"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for id in ["wilson", "thm-ukz", "lemma-u1", "vk-identity", "giuga", "conj-hk"] {
        assert!(text.contains(id), "catalog missing {id}");
    }
    assert!(text.contains("under-test"));
    assert!(text.contains("forced-identity"));
}

#[test]
fn help_enumerates_claims() {
    let out = hkscan(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("thm-ukz"));
    assert!(text.contains("Exit codes"));
}

#[test]
fn cost_ceiling_env_var_and_force() {
    let out = Command::new(env!("CARGO_BIN_EXE_hkscan"))
        .args(["scan-giuga", "--max", "2000"])
        .env("HKSCAN_COST_CEILING", "1000")
        .output()
        .unwrap();
    assert_eq!(out.status.code().unwrap(), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cost ceiling"));

    // explicit all-valid-k past the ceiling is rejected; --force overrides
    let out = hkscan(&[
        "check", "--claims", "lemma-u1", "--n-max", "500", "--k-policy", "all",
    ]);
    assert_eq!(code(&out), 0, "lemma-u1 is n-only, no ceiling applies");

    let out = hkscan(&[
        "check", "--claims", "thm-ukz", "--n-max", "420", "--k-policy", "all",
    ]);
    assert_eq!(code(&out), 3);

    let out = hkscan(&[
        "check", "--claims", "thm-ukz", "--n-max", "30", "--force",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn resume_rejects_missing_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let out = hkscan_in(dir.path(), &["resume", "--checkpoint", "nope.ckpt"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn no_args_shows_help() {
    let out = hkscan(&[]);
    // arg_required_else_help prints help; treated as a usage error
    assert_eq!(code(&out), 3);
}
