use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn hjsr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hjsr"))
        .args(args)
        .env_remove("HJSR_DEFAULT_DEPTH")
        .output()
        .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

fn report(path: &PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn every_chain_fixture_verifies() {
    for i in 1..=19 {
        let path = fixture(&format!("c{i}.json"));
        let o = hjsr(&["verify", "--input", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "c{i}: {}{}", stdout(&o), stderr(&o));
    }
    let o = hjsr(&["verify", "--input", fixture("kernels.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn c2_hand_example_terms() {
    let out = scratch("c2.json");
    let o = hjsr(&["verify", "--input", fixture("c2.json").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    let terms = r["chains"][0]["terms"].as_array().unwrap();
    for (t, want) in terms.iter().zip([1.0, 2f64.sqrt(), 2.0]) {
        assert!((t["lower"].as_f64().unwrap() - want).abs() < 1e-12);
        assert!((t["upper"].as_f64().unwrap() - want).abs() < 1e-12);
    }
    assert!(r["input_digest"].as_str().unwrap().starts_with("sha256:"));
}

#[test]
fn radius_of_shift_pair_and_identity() {
    let out = scratch("shift.json");
    let input = fixture("shift_pair.json");
    let o = hjsr(&["radius", "--input", input.to_str().unwrap(), "--depth", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&out);
    let b = &r["sets"][0]["bracket"];
    assert_eq!((b["lower"].as_f64(), b["upper"].as_f64()), (Some(2.0), Some(2.0)));
    let b = &r["sets"][1]["bracket"];
    assert_eq!((b["lower"].as_f64(), b["upper"].as_f64()), (Some(1.0), Some(1.0)));
}

#[test]
fn depth_comes_from_environment() {
    let out = scratch("env_depth.json");
    let input = fixture("shift_pair.json");
    let o = Command::new(env!("CARGO_BIN_EXE_hjsr"))
        .args(["radius", "--input", input.to_str().unwrap(), "--set", "S", "--out", out.to_str().unwrap()])
        .env("HJSR_DEFAULT_DEPTH", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(&out)["sets"][0]["stats"]["depth_reached"], 3);
}

#[test]
fn usage_errors_exit_two() {
    let o = hjsr(&["verify", "--random", "1", "1", "--chains", "C99"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("C99"));

    let o = hjsr(&["verify", "--input", fixture("negative_entry.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("entry 'B'"), "{}", stderr(&o));

    let o = hjsr(&["radius", "--input", fixture("c1.json").to_str().unwrap(), "--set", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(hjsr(&["verify"]).status.code(), Some(2));
    assert_eq!(hjsr(&["verify", "--random", "1", "1", "--dims", "3..2"]).status.code(), Some(2));
    assert_eq!(hjsr(&["kernel", "--grids", "7"]).status.code(), Some(2));
    assert_eq!(hjsr(&["kernel", "--chains", "C1"]).status.code(), Some(2));
    assert_eq!(hjsr(&["bogus"]).status.code(), Some(2));
}

#[test]
fn over_budget_terms_exit_three() {
    let input = fixture("c19.json");
    let o = hjsr(&["verify", "--input", input.to_str().unwrap(), "--max-products", "2"]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}

#[test]
fn rank_one_constant_kernel_is_an_equality() {
    let out = scratch("kernel_const.json");
    let o = hjsr(&["kernel", "--kernels", "constant", "--chains", "C7", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for row in report(&out)["kernel"]["rows"].as_array().unwrap() {
        let v: Vec<f64> = row["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert!((v[0] - v[1]).abs() <= 1e-9 * v[1], "{v:?}");
    }
}

#[test]
fn kernel_residuals_are_written() {
    let csv = scratch("residuals.csv");
    let input = fixture("kernels.json");
    let o = hjsr(&[
        "kernel", "--input", input.to_str().unwrap(), "--grids", "16,32,64", "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("chain,left,right,term,n,value_n,value_2n,residual"));
    assert!(lines.all(|l| l.contains(",16,") || l.contains(",32,")));
}

#[test]
fn campaign_reports_ignore_worker_count() {
    let run = |w: &str| {
        let out = scratch(&format!("workers{w}.json"));
        let o = hjsr(&[
            "verify", "--random", "3", "4", "--depth", "4", "--workers", w, "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        let mut r = report(&out);
        r.as_object_mut().unwrap().remove("timing");
        r
    };
    let one = run("1");
    assert_eq!(one["chains"].as_array().unwrap().len(), 4 * 19);
    assert_eq!(one, run("4"));
}

#[test]
fn bench_depth_one_prunes_nothing() {
    let out = scratch("bench1.json");
    let o = hjsr(&["bench", "--depth", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let b = &report(&out)["bench"];
    assert_eq!(b["exhaustive"]["stats"]["products_evaluated"], b["pruned"]["stats"]["products_evaluated"]);
}
