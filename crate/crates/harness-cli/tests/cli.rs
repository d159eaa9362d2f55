//! Black-box checks of the `harness` binary: exit codes and
//! reproducible outputs.

use std::path::Path;
use std::process::Command;

fn harness() -> Command {
    Command::new(env!("CARGO_BIN_EXE_harness"))
}

fn generate(dir: &Path) {
    let status = harness()
        .args([
            "generate",
            "--seed",
            "3",
            "--materials-per-category",
            "4",
            "--samples-per-material",
            "2",
            "--out",
        ])
        .arg(dir)
        .status()
        .unwrap();
    assert!(status.success());
}

#[test]
fn generate_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    generate(&a);
    generate(&b);
    for name in ["dataset.jsonl", "manifest.json"] {
        let x = std::fs::read(a.join(name)).unwrap();
        let y = std::fs::read(b.join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between identical runs");
    }
    let lines = std::fs::read_to_string(a.join("dataset.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 5 * 4 * 2);
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let status = harness().args(["generate", "--seed", "1"]).output().unwrap();
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn malformed_plan_json_exits_two_with_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let plan = tmp.path().join("plan.json");
    std::fs::write(&plan, "{\"condition\":\"LP\"").unwrap();
    let out = harness()
        .args(["estimate", "--m-seed", "1", "--plan"])
        .arg(&plan)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("parsing plan"), "stderr: {stderr}");
}

#[test]
fn missing_dataset_directory_is_fatal() {
    let tmp = tempfile::tempdir().unwrap();
    let out = harness()
        .args(["sweep", "--dataset"])
        .arg(tmp.path().join("nowhere"))
        .args(["--out"])
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn sweep_runs_end_to_end_and_reproduces_results() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    generate(&data);
    let sweep = |out: &Path| {
        let status = harness()
            .args(["sweep", "--dataset"])
            .arg(&data)
            .arg("--out")
            .arg(out)
            .args([
                "--conditions",
                "QWP",
                "--regimes",
                "Random,Optimized",
                "--k",
                "2",
                "--trials",
                "2",
                "--steps",
                "20",
                "--batch-size",
                "16",
                "--base-seed",
                "9",
            ])
            .status()
            .unwrap();
        assert!(status.success());
    };
    let r1 = tmp.path().join("r1");
    let r2 = tmp.path().join("r2");
    sweep(&r1);
    sweep(&r2);
    let a = std::fs::read(r1.join("results.csv")).unwrap();
    let b = std::fs::read(r2.join("results.csv")).unwrap();
    assert_eq!(a, b, "results.csv differs between identical sweep runs");
    let results = String::from_utf8(a).unwrap();
    assert_eq!(results.lines().count(), 1 + 4, "header plus 4 trial rows");
    assert!(results
        .lines()
        .next()
        .unwrap()
        .starts_with("condition,regime,K,trial,seed,test_accuracy,rank,condition_number"));
    assert!(r1.join("summary.csv").exists());
    assert!(r1.join("plans/QWP_Optimized_K2_trial1.json").exists());
}

#[test]
fn config_file_overrides_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    generate(&data);
    let config = tmp.path().join("cfg.json");
    std::fs::write(
        &config,
        "{\"regimes\":[\"Random\"],\"k_values\":[3],\"trials\":1,\"steps\":5,\"batch_size\":8}",
    )
    .unwrap();
    let out_dir = tmp.path().join("out");
    let status = harness()
        .args(["sweep", "--dataset"])
        .arg(&data)
        .arg("--out")
        .arg(&out_dir)
        .args(["--conditions", "QWP", "--regimes", "Optimized", "--k", "2", "--trials", "4"])
        .arg("--config")
        .arg(&config)
        .status()
        .unwrap();
    assert!(status.success());
    let results = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    let rows: Vec<&str> = results.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("QWP,Random,3,0,"));
}

#[test]
fn lp_qwp_uniform_is_skipped_with_a_log_line() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    generate(&data);
    let out = harness()
        .args(["sweep", "--dataset"])
        .arg(&data)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .args([
            "--conditions",
            "LP+QWP",
            "--regimes",
            "Uniform",
            "--k",
            "2",
            "--trials",
            "1",
            "--steps",
            "1",
            "--batch-size",
            "8",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("skipping (LP+QWP, Uniform)"), "stderr: {stderr}");
    let results =
        std::fs::read_to_string(tmp.path().join("out").join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 1, "header only, no data rows");
}

#[test]
fn analyze_angles_on_empty_input_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("angles");
    let status = harness()
        .args(["analyze-angles", "--out"])
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out_dir.join("angles.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1, "header only");
}
