use std::path::{Path, PathBuf};
use std::process::Command;

use partial_repair::exact::ExactSecureSystem;
use partial_repair::fixtures;
use partial_repair::harness::{self as h, ErrorRecord, RunConfig};
use partial_repair::secrecy::{SecrecyAudit, SecretPartition};
use partial_repair::{CachingSystem, ErasurePattern, FieldMatrix, PrimeField, RepairPlan};

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn spr(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_spr"))
        .args(args)
        .env_remove(h::OUT_DIR_ENV)
        .output()
        .expect("binary runs")
}

#[test]
fn golden_files_match_fixtures() {
    let sys: CachingSystem = h::read_json(&golden("four_two_system.json")).unwrap();
    assert_eq!(sys, fixtures::four_two_system());
    let pat: ErasurePattern = h::read_json(&golden("two_partial_pattern.json")).unwrap();
    assert_eq!(pat, fixtures::two_partial_pattern());
    let plan: RepairPlan = h::read_json(&golden("two_broadcast_plan.json")).unwrap();
    assert_eq!(
        plan.broadcast_matrix(&sys),
        fixtures::two_broadcast_plan().broadcast_matrix(&sys)
    );
    let part: SecretPartition = h::read_json(&golden("two_key_partition.json")).unwrap();
    assert_eq!(part, fixtures::two_key_partition());

    let exact: ExactSecureSystem = h::read_json(&golden("exact_k3.json")).unwrap();
    let f = PrimeField::new(5).unwrap();
    let s = FieldMatrix::from_rows(f, 1, &[[1], [2], [3]]).unwrap();
    let z = FieldMatrix::from_rows(f, 2, &[[4, 0], [1, 1], [2, 3]]).unwrap();
    assert_eq!(exact, ExactSecureSystem::with_keys(3, f, &s, &z).unwrap());

    // Writing the fixtures back reproduces the files byte for byte.
    for (name, text) in [
        ("four_two_system.json", h::to_json(&sys)),
        ("two_partial_pattern.json", h::to_json(&pat)),
        ("two_broadcast_plan.json", h::to_json(&plan)),
        ("two_key_partition.json", h::to_json(&part)),
        ("exact_k3.json", h::to_json(&exact)),
    ] {
        assert_eq!(
            std::fs::read_to_string(golden(name)).unwrap(),
            text,
            "{name}"
        );
    }
}

#[test]
fn artifacts_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(5, 2, 3, 65537);
    cfg.erase_prob = 0.3;
    cfg.keys = 2;
    let sys = h::cmd_build(&cfg, 8).unwrap();
    let pat = h::cmd_erase(&sys, &h::PatternSpec::Random(0.3), 8).unwrap();
    let (report, plan) = h::cmd_plan(&sys, &pat).unwrap();
    let rep = h::cmd_repair_functional(&sys, &pat, &plan, 8).unwrap();
    let audit = h::cmd_audit(
        &sys,
        &rep.plan,
        &cfg.partition().unwrap(),
        partial_repair::secrecy::Scope::Fixed,
        None,
    )
    .unwrap();

    let p = |n: &str| dir.path().join(n);
    h::write_json(&p("s.json"), &sys).unwrap();
    h::write_json(&p("p.json"), &pat).unwrap();
    h::write_json(&p("plan.json"), &rep.plan).unwrap();
    h::write_json(&p("r.json"), &rep).unwrap();
    h::write_json(&p("a.json"), &audit).unwrap();
    h::write_json(&p("c.json"), &cfg).unwrap();
    h::write_json(&p("report.json"), &report).unwrap();

    assert_eq!(h::read_json::<CachingSystem>(&p("s.json")).unwrap(), sys);
    assert_eq!(h::read_json::<ErasurePattern>(&p("p.json")).unwrap(), pat);
    let plan2: RepairPlan = h::read_json(&p("plan.json")).unwrap();
    assert_eq!(
        plan2.broadcast_matrix(&sys),
        rep.plan.broadcast_matrix(&sys)
    );
    assert_eq!(
        h::read_json::<h::RepairReport>(&p("r.json"))
            .unwrap()
            .system,
        rep.system
    );
    assert_eq!(h::read_json::<SecrecyAudit>(&p("a.json")).unwrap(), audit);
    assert_eq!(h::read_json::<RunConfig>(&p("c.json")).unwrap(), cfg);
    assert_eq!(
        h::read_json::<h::PlanReport>(&p("report.json")).unwrap(),
        report
    );
}

#[test]
fn corrupted_artifacts_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(golden("four_two_system.json")).unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, text.replace("\"q\": 3", "\"q\": 4")).unwrap();
    assert!(matches!(
        h::read_json::<CachingSystem>(&bad),
        Err(h::HarnessError::Schema { .. })
    ));
    std::fs::write(
        &bad,
        text.replace("\"schema_version\": 1", "\"schema_version\": 9"),
    )
    .unwrap();
    assert!(h::read_json::<CachingSystem>(&bad).is_err());
}

#[test]
fn cli_plan_and_audit_on_fixtures() {
    let out = spr(&[
        "plan",
        "--system",
        golden("four_two_system.json").to_str().unwrap(),
        "--pattern",
        golden("two_partial_pattern.json").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: h::PlanReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.gamma_min_formula, "2");
    assert_eq!(report.gamma_min_oracle, Some(2));
    assert_eq!(report.r, vec![1, 1, 0, 0]);

    let system = golden("four_two_system.json");
    let plan = golden("two_broadcast_plan.json");
    let partition = golden("two_key_partition.json");
    let audit = |extra: &[&str]| {
        let mut args = vec![
            "audit",
            "--system",
            system.to_str().unwrap(),
            "--plan",
            plan.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        spr(&args)
    };
    let secured = audit(&["--partition", partition.to_str().unwrap()]);
    assert!(secured.status.success());
    let a: SecrecyAudit = serde_json::from_slice(&secured.stdout).unwrap();
    assert_eq!((a.leakage_qary, a.strong_secure), (0, true));

    let plain = audit(&["--mode", "strong"]);
    assert_eq!(plain.status.code(), Some(11));
    let rec: ErrorRecord = serde_json::from_slice(&plain.stderr).unwrap();
    assert_eq!(rec.error, "audit");

    assert!(audit(&["--mode", "weak"]).status.success());
}

#[test]
fn cli_error_classes_have_distinct_codes() {
    let missing = spr(&[
        "erase",
        "--system",
        "/nonexistent.json",
        "--pattern",
        "counts:1",
    ]);
    assert_eq!(missing.status.code(), Some(3));
    let infeasible = spr(&[
        "erase",
        "--system",
        golden("four_two_system.json").to_str().unwrap(),
        "--pattern",
        "counts:1,1,1,0",
    ]);
    assert_eq!(infeasible.status.code(), Some(6));
    let field = spr(&["exact", "--k", "3", "--field", "3"]);
    assert_eq!(field.status.code(), Some(7));
    let bad_scope = spr(&[
        "audit",
        "--system",
        golden("four_two_system.json").to_str().unwrap(),
        "--plan",
        golden("two_broadcast_plan.json").to_str().unwrap(),
        "--scope",
        "everywhere",
    ]);
    assert_eq!(bad_scope.status.code(), Some(5));
    let usage = spr(&["build"]);
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn cli_simulate_is_byte_identical_and_honours_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "--n",
        "5",
        "--k",
        "3",
        "--t",
        "2",
        "--erase-prob",
        "0.3",
        "--keys",
        "2",
        "--episodes",
        "20",
        "--seed",
        "42",
    ];
    let a = spr(&args);
    let b = spr(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8(a.stdout).unwrap().lines().count(), 21);

    let status = Command::new(env!("CARGO_BIN_EXE_spr"))
        .args(args)
        .env(h::OUT_DIR_ENV, dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("simulate.csv").exists());
    let sim: h::Simulation = h::read_json(&dir.path().join("simulate.json")).unwrap();
    assert_eq!(sim.rows.len(), 20);
}

#[test]
fn cli_exact_repair_on_fixture() {
    let out = spr(&[
        "repair",
        "--mode",
        "exact-uv",
        "--system",
        golden("exact_k3.json").to_str().unwrap(),
        "--u",
        "1",
        "--v",
        "3",
    ]);
    assert!(out.status.success());
    let rep: h::ExactRepairReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(rep.exact);
    assert_eq!(rep.gamma, 6);
    assert_eq!(rep.gamma_min_formula, "6");
}

#[test]
fn zero_erasure_simulation_reports_zero_budget() {
    let sim = h::cmd_simulate(&RunConfig::new(4, 2, 2, 11), 3, 10).unwrap();
    assert!(sim
        .rows
        .iter()
        .all(|r| r.gamma_min_formula == "0" && r.gamma == 0 && r.unchanged));
}
