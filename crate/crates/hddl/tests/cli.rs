//! Exit-code contract and output routing of the `hddl` binary.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::corpus_path;

fn hddl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hddl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn corpus(name: &str) -> String {
    corpus_path(name).to_string_lossy().into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn validate_exit_codes() {
    // Corrected pair validates cleanly.
    let out = hddl(&["validate", &corpus("transport.domain.hddl"), &corpus("transport-p1.problem.hddl")]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    // Missing file is a usage error.
    let out = hddl(&["validate", "/nonexistent/d.hddl", &corpus("transport-p1.problem.hddl")]);
    assert_eq!(code(&out), 2);

    // Unparseable domain is an input error.
    let out = hddl(&["validate", &corpus("invalid/unknown-section.domain.hddl"), &corpus("transport-p1.problem.hddl")]);
    assert_eq!(code(&out), 3);

    // Semantic errors are input errors too.
    let out = hddl(&["validate", &corpus("transport-verbatim.domain.hddl"), &corpus("transport-verbatim.problem.hddl")]);
    assert_eq!(code(&out), 3);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("undeclared variable ?li"), "{stderr}");

    // Bad flags are a usage error (clap's own exit code).
    let out = hddl(&["validate", "--definitely-not-a-flag"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn strict_requirements_flag_gates_validation() {
    let d = corpus("strict-missing.domain.hddl");
    let p = corpus("strict-missing.problem.hddl");
    assert_eq!(code(&hddl(&["validate", &d, &p])), 0);
    assert_eq!(code(&hddl(&["validate", &d, &p, "--strict-requirements"])), 3);
}

#[test]
fn plan_writes_a_witness_with_the_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let witness = dir.path().join("w.txt");
    let out = hddl(&[
        "plan",
        &corpus("transport.domain.hddl"),
        &corpus("transport-p1.problem.hddl"),
        "-o",
        witness.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&witness).unwrap();
    let action_lines = text
        .lines()
        .skip(1)
        .take_while(|l| !l.starts_with("root"))
        .count();
    assert_eq!(action_lines, 4, "{text}");

    // The planner's own output verifies.
    let out = hddl(&[
        "verify",
        &corpus("transport.domain.hddl"),
        &corpus("transport-p1.problem.hddl"),
        witness.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn witness_is_bit_stable_across_runs() {
    let run = || {
        let out = hddl(&[
            "plan",
            "--quiet",
            &corpus("transport.domain.hddl"),
            &corpus("transport-p2.problem.hddl"),
        ]);
        assert_eq!(code(&out), 0);
        out.stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn quiet_routes_everything_but_the_witness_to_stderr() {
    let out = hddl(&[
        "plan",
        "--quiet",
        "--stats",
        &corpus("transport.domain.hddl"),
        &corpus("transport-p1.problem.hddl"),
    ]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("==>"), "stdout must be the witness only:\n{stdout}");
    assert!(stdout.trim_end().ends_with("<=="), "{stdout}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("nodes_expanded="), "stats on stderr: {stderr}");
}

#[test]
fn plan_exit_codes_for_unsolvable_and_budget() {
    // Unsolvable as published, proven under exhaustive search.
    let out = hddl(&[
        "plan",
        &corpus("transport.domain.hddl"),
        &corpus("transport-verbatim.problem.hddl"),
        "--exhaustive",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("proven unsolvable"));

    // A node budget of 1 cannot solve a nontrivial instance.
    let out = hddl(&[
        "plan",
        &corpus("transport.domain.hddl"),
        &corpus("transport-p1.problem.hddl"),
        "--max-nodes",
        "1",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("node-budget"));
}

#[test]
fn verify_rejects_mutations_with_the_right_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let witness = dir.path().join("w.txt");
    let out = hddl(&[
        "plan",
        "--quiet",
        &corpus("transport.domain.hddl"),
        &corpus("transport-p1.problem.hddl"),
        "-o",
        witness.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&witness).unwrap();

    // Shuffled actions violating the derived order: ordering stage, exit 1.
    let reordered = text
        .replace("1 pick-up city-loc-1 package-0", "1 drive city-loc-1 city-loc-0")
        .replace("2 drive city-loc-1 city-loc-0", "2 pick-up city-loc-1 package-0")
        .replace("m-deliver 5 1 6 3", "m-deliver 5 2 6 3")
        .replace("m-direct 2", "m-direct 1");
    let shuffled = dir.path().join("shuffled.txt");
    std::fs::write(&shuffled, reordered).unwrap();
    let out = hddl(&[
        "verify",
        &corpus("transport.domain.hddl"),
        &corpus("transport-p1.problem.hddl"),
        shuffled.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("stage=ordering"));

    // Garbage is malformed: exit 3.
    let garbage = dir.path().join("garbage.txt");
    std::fs::write(&garbage, "this is not a witness\n").unwrap();
    let out = hddl(&[
        "verify",
        &corpus("transport.domain.hddl"),
        &corpus("transport-p1.problem.hddl"),
        garbage.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn empty_witness_verifies_for_empty_network_without_goal() {
    let dir = tempfile::tempdir().unwrap();
    let witness = dir.path().join("empty.txt");
    std::fs::write(&witness, "==>\nroot\n<==\n").unwrap();
    let out = hddl(&[
        "verify",
        &corpus("empty.domain.hddl"),
        &corpus("empty.problem.hddl"),
        witness.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn fmt_is_idempotent_and_leaves_broken_files_alone() {
    let dir = tempfile::tempdir().unwrap();
    let copy = dir.path().join("d.hddl");
    std::fs::copy(corpus_path("transport.domain.hddl"), &copy).unwrap();
    assert_eq!(code(&hddl(&["fmt", copy.to_str().unwrap()])), 0);
    let once = std::fs::read_to_string(&copy).unwrap();
    assert_eq!(code(&hddl(&["fmt", copy.to_str().unwrap()])), 0);
    let twice = std::fs::read_to_string(&copy).unwrap();
    assert_eq!(once, twice, "fmt must be idempotent");

    let broken = dir.path().join("broken.hddl");
    std::fs::write(&broken, "(define (domain d) (:foo))").unwrap();
    assert_eq!(code(&hddl(&["fmt", broken.to_str().unwrap()])), 3);
    assert_eq!(std::fs::read_to_string(&broken).unwrap(), "(define (domain d) (:foo))");
}

#[test]
fn ground_listing_matches_library_output() {
    let out = hddl(&[
        "ground",
        &corpus("transport.domain.hddl"),
        &corpus("transport-p1.problem.hddl"),
    ]);
    assert_eq!(code(&out), 0);
    let listing = String::from_utf8_lossy(&out.stdout);
    assert!(listing.contains("action drive[city-loc-0,city-loc-1]"));
    assert!(listing.contains("method m-direct["));
    assert!(listing.contains("tn 0 deliver[package-0,city-loc-0]"));
    let drives = listing.lines().filter(|l| l.starts_with("action drive[")).count();
    assert_eq!(drives, 9);
}

#[test]
fn hddl_color_env_toggles_ansi_codes() {
    let run = |color: &str| {
        Command::new(env!("CARGO_BIN_EXE_hddl"))
            .env("HDDL_COLOR", color)
            .args([
                "validate",
                &corpus("transport-verbatim.domain.hddl"),
                &corpus("transport-verbatim.problem.hddl"),
            ])
            .output()
            .unwrap()
    };
    let plain = String::from_utf8_lossy(&run("0").stderr).into_owned();
    assert!(!plain.contains("\x1b["), "{plain}");
    let colored = String::from_utf8_lossy(&run("1").stderr).into_owned();
    assert!(colored.contains("\x1b[31merror\x1b[0m"), "{colored}");
}

#[test]
fn json_diagnostics_are_one_object_per_line() {
    let out = hddl(&[
        "validate",
        "--json",
        &corpus("transport-verbatim.domain.hddl"),
        &corpus("transport-verbatim.problem.hddl"),
    ]);
    assert_eq!(code(&out), 3);
    let stderr = String::from_utf8_lossy(&out.stderr);
    for line in stderr.lines() {
        let v: serde_json::Value = serde_json::from_str(line).expect("each line is JSON");
        for field in ["file", "line", "col", "severity", "code", "message"] {
            assert!(v.get(field).is_some(), "missing {field} in {line}");
        }
    }
    let _ = Path::new("unused");
}
