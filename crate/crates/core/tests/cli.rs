use std::path::PathBuf;
use std::process::Command;

fn hchan() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hchan"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hchan-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(hchan().arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(hchan().arg("--version").output().unwrap().status.code(), Some(0));
}

#[test]
fn bad_usage_exits_one() {
    assert_eq!(hchan().arg("no-such-command").output().unwrap().status.code(), Some(1));
    assert_eq!(
        hchan()
            .args(["constants", "--format", "xml"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn unknown_config_key_exits_one() {
    let cfg = scratch("unknown.toml");
    std::fs::write(&cfg, "experiment = \"constants\"\nnot_a_key = 3\n").unwrap();
    let out = hchan().args(["constants", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not_a_key"));
}

#[test]
fn missing_config_file_exits_one() {
    let out = hchan()
        .args(["constants", "--config", "/nonexistent/cfg.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn failed_check_exits_two() {
    let cfg = scratch("strict.toml");
    // the limit at nu = 50 is still about 1e-2 away
    std::fs::write(&cfg, "nu_list = [20, 50]\ntolerance = 1e-9\nrecord_timing = false\n").unwrap();
    let out = hchan().args(["toeplitz-trace", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_output_is_deterministic() {
    let cfg = scratch("det.toml");
    std::fs::write(
        &cfg,
        "experiment = \"channel-limit\"\nnu_list = [50, 100, 200, 400]\nrecord_timing = false\n",
    )
    .unwrap();
    let run = |threads: &str, out: &PathBuf| {
        let st = hchan()
            .args(["channel-limit", "--threads", threads, "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert_eq!(st.code(), Some(0));
        std::fs::read_to_string(out).unwrap()
    };
    let a = run("1", &scratch("a.csv"));
    let b = run("3", &scratch("b.csv"));
    assert_eq!(a, b);
    assert!(a.starts_with("nu,measured,target,abs_error,tail_bound,seconds\n"));
    assert_eq!(a.lines().count(), 5);
}

#[test]
fn json_by_extension_and_seed_override() {
    let out = scratch("husimi.json");
    let st = hchan()
        .args(["husimi-check", "--seed", "9", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["experiment"], "husimi-check");
    assert_eq!(v["config"]["seed"], 9);
    assert_eq!(v["passed"], true);
}
