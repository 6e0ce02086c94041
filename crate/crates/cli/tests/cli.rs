use std::path::Path;
use std::process::{Command, Output};

fn gem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gem")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("small.toml");
    let text = r#"
population_size = 6
max_generations = 3
alpha = 0.55
visual_lower = 0.5
visual_upper = 1.0
objective_mode = "multi_objective"
self_mating_probability = 0.2
cross_domain_probability = 0.3
seed = 5
novelty_baseline_samples = 16
raster_resolution = 64
physical_objectives = [
  { name = "drag_proxy", sense = "minimize" },
  { name = "lift_proxy", sense = "minimize" },
]

[[tasks]]
index = 1
domain_phrase = "car"

[[tasks]]
index = 2
domain_phrase = "airplane"
objectives = [
  { name = "drag_proxy", sense = "minimize" },
  { name = "lift_proxy", sense = "maximize" },
]
"#;
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn missing_config_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = gem(&["run", "--config", "/nonexistent/run.toml", "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/run.toml"));
}

#[test]
fn run_resume_report_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let whole = dir.path().join("whole");
    let parts = dir.path().join("parts");
    let o = gem(&["run", "--config", &config, "--out", whole.to_str().unwrap(), "--random-baseline"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = gem(&["run", "--config", &config, "--out", parts.to_str().unwrap(), "--random-baseline", "--stop-after", "1"]);
    assert!(o.status.success());
    let o = gem(&["report", "--out", parts.to_str().unwrap()]);
    assert!(!o.status.success(), "report of a partial run must fail");
    let o = gem(&["resume", "--out", parts.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let log = |d: &Path| std::fs::read(d.join("log.jsonl")).unwrap();
    assert_eq!(log(&whole), log(&parts));
    assert_eq!(String::from_utf8(log(&whole)).unwrap().lines().count(), 6 + 6 * 3);

    let o = gem(&["resume", "--out", parts.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(log(&whole), log(&parts));

    for d in [&whole, &parts] {
        let o = gem(&["report", "--out", d.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["fitness_trend.csv", "hypervolume.csv", "novelty.csv", "vocabulary.csv"] {
        let a = std::fs::read(whole.join("report").join(f)).unwrap();
        assert_eq!(a, std::fs::read(parts.join("report").join(f)).unwrap(), "{f}");
    }
    let hv = std::fs::read_to_string(whole.join("report/hypervolume.csv")).unwrap();
    assert_eq!(hv.lines().filter(|l| l.ends_with(",ok")).count(), 2, "{hv}");
}

#[test]
fn same_seed_same_log() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let o = gem(&["run", "--config", &config, "--out", d.to_str().unwrap(), "--seed", "11"]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(a.join("log.jsonl")).unwrap(), std::fs::read(b.join("log.jsonl")).unwrap());
}

#[test]
fn resume_empty_dir_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = gem(&["resume", "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
}

#[test]
fn baseline_cache_reuse() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("baselines");
    let args = ["baseline", "--config", &config, "--task", "2", "--samples", "10", "--out", out.to_str().unwrap()];
    let first = gem(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert!(String::from_utf8_lossy(&first.stdout).starts_with("built"));
    let second = gem(&args);
    assert!(String::from_utf8_lossy(&second.stdout).starts_with("reused"));
    let o = gem(&["baseline", "--config", &config, "--task", "9", "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
}

#[test]
fn hv_over_csv() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    std::fs::write(&pts, "x,y\n0.2,0.4\n0.4,0.2\n").unwrap();
    let o = gem(&["hv", "--points", pts.to_str().unwrap()]);
    assert!(o.status.success());
    let v: f64 = String::from_utf8_lossy(&o.stdout).trim().parse().unwrap();
    assert!((v - 0.6).abs() < 1e-12);
    let o = gem(&["hv", "--points", pts.to_str().unwrap(), "--reference", "0.1,0.1"]);
    assert!(!o.status.success());
}
