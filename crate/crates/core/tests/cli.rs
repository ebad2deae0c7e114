mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use common::*;
use macregion::cli::{self, EXIT_INFEASIBLE, EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK, EXIT_SER};
use macregion::io::*;
use macregion::region::{region_for, RateRegion, Scheme, DEFAULT_SAMPLES};
use macregion::scheduler::{synth_schedule, Scenario, Target};
use macregion::GapParams;
use proptest::prelude::*;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["macregion"];
    full.extend_from_slice(args);
    let code = cli::run(full, &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn equal_file(dir: &Path) -> PathBuf {
    write(dir, "equal.json", &format!(r#"{{"p1": 139, "p2": 139, "n0": 1, "pe": {REF_PE:e}}}"#))
}

fn unequal_file(dir: &Path) -> PathBuf {
    write(dir, "unequal.json", &format!(r#"{{"p1": {UNEQUAL_P1:?}, "p2": {UNEQUAL_P2:?}, "n0": 1, "pe": {REF_PE:e}}}"#))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn region_csv_for_references() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&["region", "--scenario", s(&equal_file(dir.path())), "--schemes", "superpos_pc"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.starts_with("scheme,vertex,r1,r2\n"));
    assert!(r.stdout.contains("superpos_pc,2,2.00000000000,0.312500000000\n"), "{}", r.stdout);

    let out = dir.path().join("unequal.csv");
    let r = run(&["region", "--scenario", s(&unequal_file(dir.path())), "--out", s(&out)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let regions = regions_from_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(regions.len(), Scheme::ALL.len());
    let no_pc = regions.iter().find(|g| g.scheme() == Scheme::SuperposNoPc).unwrap();
    let poly: Vec<(f64, f64)> = no_pc.polygon().iter().map(|p| (p.r1, p.r2)).collect();
    assert_eq!(poly, vec![(0.0, 3.0), (1.0, 3.0), (4.0, 0.0), (0.0, 0.0)]);
}

#[test]
fn swapped_users_warn() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "swap.json", r#"{"p1": 10, "p2": 200, "n0": 1, "pe": 1e-6}"#);
    let r = run(&["region", "--scenario", s(&f), "--schemes", "tdma_naive"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stderr.contains("warning"));
    let out = dir.path().join("sched.json");
    assert_eq!(run(&["schedule", "--scenario", s(&f), "--target", "c1", "--out", s(&out)]).code, EXIT_OK);
    assert!(std::fs::read_to_string(&out).unwrap().contains("\"swapped\": true"));
}

#[test]
fn invalid_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = [
        r#"{"p1": 1, "p2": 1, "n0": 1}"#,
        r#"{"p1": 1, "p2": 1, "n0": 1, "pe": 1.5}"#,
        r#"{"p1": -1, "p2": 1, "n0": 1, "pe": 1e-6}"#,
        r#"{"p1": 1, "p2": 1, "n0": 1, "pe": 1e-6, "color": "red"}"#,
        "not json",
    ];
    for (i, body) in bad.iter().enumerate() {
        let f = write(dir.path(), &format!("bad{i}.json"), body);
        let r = run(&["compare", "--scenario", s(&f)]);
        assert_eq!(r.code, EXIT_INVALID, "{body}: {}", r.stderr);
        assert!(r.stderr.starts_with("error:"));
    }
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["region", "--scenario", s(&missing)]).code, EXIT_INVALID);
    assert_eq!(run(&["region", "--scenario", s(&equal_file(dir.path())), "--schemes", "fdma"]).code, EXIT_INVALID);
    assert_eq!(run(&["bogus"]).code, EXIT_INVALID);
    // Pe this large leaves the gap below one and the sum fixed point unbracketed
    let loose = write(dir.path(), "loose.json", r#"{"p1": 1, "p2": 1, "n0": 1, "pe": 0.7}"#);
    assert_eq!(run(&["compare", "--scenario", s(&loose)]).code, EXIT_NUMERICAL);
    assert_eq!(run(&["schedule", "--scenario", s(&equal_file(dir.path())), "--target", "z"]).code, EXIT_INVALID);
}

#[test]
fn infeasible_targets_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let f = equal_file(dir.path());
    let r = run(&["schedule", "--scenario", s(&f), "--target", "theta=1.5"]);
    assert_eq!(r.code, EXIT_INFEASIBLE);
    assert!(r.stderr.contains("theta"));
    let weak = write(dir.path(), "weak.json", r#"{"p1": 0.5, "p2": 0.5, "n0": 1, "pe": 1e-6}"#);
    let r = run(&["schedule", "--scenario", s(&weak), "--target", "c"]);
    assert_eq!(r.code, EXIT_INFEASIBLE);
    assert!(r.stderr.contains("user-1"));
}

#[test]
fn schedule_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let f = equal_file(dir.path());
    let r = run(&["schedule", "--scenario", s(&f), "--target", "c1"]);
    assert_eq!(r.code, EXIT_OK);
    let sched = schedule_from_json(&r.stdout).unwrap();
    let fr: Vec<f64> = sched.phases().iter().map(|p| p.fraction()).collect();
    assert!((fr[0] - 0.6875).abs() < 1e-12 && (fr[1] - 0.3125).abs() < 1e-12);

    let r = run(&["schedule", "--scenario", s(&f), "--target", "c"]);
    assert_eq!(schedule_from_json(&r.stdout).unwrap().phases().len(), 1);

    let r = run(&["schedule", "--scenario", s(&f), "--target", "theta=0.5"]);
    let mix = schedule_from_json(&r.stdout).unwrap();
    assert_eq!(mix.phases().len(), 4);
    assert!((mix.rates().r1 - 0.5 * (0.3125 + 2.0)).abs() < 1e-12);
}

#[test]
fn simulate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let f = equal_file(dir.path());
    let sched = dir.path().join("c1.json");
    assert_eq!(run(&["schedule", "--scenario", s(&f), "--target", "c1", "--out", s(&sched)]).code, EXIT_OK);

    let r = run(&["simulate", "--schedule", s(&sched), "--symbols", "1000"]);
    assert_eq!(r.code, EXIT_INVALID);

    let text = std::fs::read_to_string(&sched).unwrap();
    let inflated = text.replacen("\"power\": 139.0", "\"power\": 278.0", 1);
    assert_ne!(inflated, text);
    let bad = write(dir.path(), "inflated.json", &inflated);
    let r = run(&["simulate", "--schedule", s(&bad), "--symbols", "20000"]);
    assert_eq!(r.code, EXIT_INVALID, "{}", r.stderr);
    assert!(r.stderr.contains("power budget"));

    let garbled = write(dir.path(), "garbled.json", "{\"phases\": []}");
    assert_eq!(run(&["simulate", "--schedule", s(&garbled)]).code, EXIT_INVALID);

    let out = dir.path().join("report.json");
    let r = run(&["simulate", "--schedule", s(&sched), "--symbols", "100000", "--seed", "3", "--out", s(&out)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let report = report_from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report.seed, 3);
    assert_eq!(report.symbols_run, 100_000);
}

#[test]
fn ser_failure_exits_5() {
    // the inner 2-PAM of point b also loses symbols across the gaps between
    // the outer user's points, so it misses the lone-user Pe
    let dir = tempfile::tempdir().unwrap();
    let sc = Scenario::at_integer_levels(3, 1, 1.0, GapParams::uncoded(1e-2).unwrap()).unwrap();
    let text = schedule_to_json(&synth_schedule(Target::B, &sc).unwrap(), Some(Target::B));
    let f = write(dir.path(), "b.json", &text);
    let out = dir.path().join("report.json");
    let r = run(&["simulate", "--schedule", s(&f), "--symbols", "200000", "--out", s(&out)]);
    assert_eq!(r.code, EXIT_SER, "{}", r.stderr);
    let report = report_from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report.per_user_ser[1] > macregion::sim::compliance_threshold(1e-2, 200_000), "{:?}", report.per_user_ser);
    assert!(report.per_user_ser[0] < 1e-2);
}

#[test]
fn compare_table_reports_gap_and_containment() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&["compare", "--scenario", s(&equal_file(dir.path()))]);
    assert_eq!(r.code, EXIT_OK);
    let gap_line = r.stdout.lines().find(|l| l.starts_with("sum_rate_gap")).unwrap();
    let gap: f64 = gap_line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((gap - 0.165).abs() <= 0.02);

    let r = run(&["compare", "--scenario", s(&unequal_file(dir.path()))]);
    let row = r.stdout.lines().rfind(|l| l.starts_with("superpos_pc ")).unwrap();
    let cells: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(cells.last(), Some(&"yes"), "{row}");
    assert!(!r.stdout.contains("note:"));
}

#[test]
fn failed_runs_leave_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    let bad = write(dir.path(), "bad.json", r#"{"p1": 1}"#);
    assert_eq!(run(&["region", "--scenario", s(&bad), "--out", s(&out)]).code, EXIT_INVALID);
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn binary_honours_thread_cap() {
    let dir = tempfile::tempdir().unwrap();
    let f = equal_file(dir.path());
    let sched = dir.path().join("b1.json");
    assert_eq!(run(&["schedule", "--scenario", s(&f), "--target", "b1", "--out", s(&sched)]).code, EXIT_OK);
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let o = Command::new(env!("CARGO_BIN_EXE_macregion"))
            .args(["simulate", "--schedule", s(&sched), "--symbols", "200000", "--seed", "42"])
            .env("MACREGION_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(o.stdout);
    }
    assert_eq!(outputs[0], outputs[1]);
    let o = Command::new(env!("CARGO_BIN_EXE_macregion")).args(["simulate", "--schedule", "/nonexistent"]).output().unwrap();
    assert_eq!(o.status.code(), Some(EXIT_INVALID));
}

fn sig12_equal(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 5e-12 * a.abs().max(b.abs())
}

fn region_pair(scenario: &Scenario) -> Vec<RateRegion> {
    Scheme::ALL.iter().map(|&s| region_for(s, scenario, DEFAULT_SAMPLES).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scenario_round_trip(p1 in 1e-3f64..1e6, p2 in 1e-3f64..1e6, n0 in 1e-3f64..10.0, e in 1.0f64..12.0, gain in proptest::option::of(0.0f64..6.0)) {
        let file = ScenarioFile { p1, p2, n0, pe: 10f64.powf(-e), coding_gain_db: gain };
        let text = serde_json::to_string(&file).unwrap();
        prop_assert_eq!(ScenarioFile::from_json(&text).unwrap(), file);
    }

    #[test]
    fn schedule_round_trip(r1 in 1u32..=6, spread in 0u32..=2, e in 4.0f64..9.0, theta in 0.0f64..=1.0) {
        let r2 = r1.saturating_sub(spread).max(1);
        let sc = Scenario::at_integer_levels(r1, r2, 1.0, GapParams::uncoded(10f64.powf(-e)).unwrap()).unwrap();
        for target in [Target::B1, Target::C1, Target::Theta(theta)] {
            let sched = synth_schedule(target, &sc).unwrap();
            let text = schedule_to_json(&sched, Some(target));
            let back = schedule_from_json(&text).unwrap();
            prop_assert_eq!(back.phases(), sched.phases());
            prop_assert_eq!(back.scenario(), sched.scenario());
            prop_assert_eq!(schedule_to_json(&back, Some(target)), text);
        }
    }

    #[test]
    fn region_csv_round_trip(p1 in 1.0f64..1e5, ratio in 1.0f64..20.0) {
        let sc = Scenario::new(p1, p1 / ratio, 1.0, ref_params()).unwrap();
        let regions = region_pair(&sc);
        let csv = regions_to_csv(&regions);
        let back = regions_from_csv(&csv).unwrap();
        prop_assert_eq!(back.len(), regions.len());
        for (a, b) in regions.iter().zip(&back) {
            prop_assert_eq!(a.scheme(), b.scheme());
            prop_assert_eq!(a.vertices().len(), b.vertices().len());
            for (u, v) in a.vertices().iter().zip(b.vertices()) {
                prop_assert!(sig12_equal(u.r1, v.r1) && sig12_equal(u.r2, v.r2));
            }
        }
        prop_assert_eq!(regions_to_csv(&back), csv);
    }
}
