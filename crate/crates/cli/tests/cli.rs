use std::path::Path;
use std::process::{Command, Output};

const SMALL_MAP: &str = "type octile\nheight 8\nwidth 10\nmap\n\
..........\n\
..........\n\
...@@.....\n\
...@@..@..\n\
.......@..\n\
..........\n\
..@.......\n\
..........\n";

fn setup(dir: &Path, extra: &str) -> std::path::PathBuf {
    std::fs::write(dir.join("small.map"), SMALL_MAP).unwrap();
    let cfg = dir.join("exp.toml");
    let text = format!(
        "[map]\npath = \"small.map\"\n[evaders]\nmove_samples = 10\n[assignment]\nsamples = 10\n[run]\nseed = 4\nruns = 2\nmax_steps = 60\n{extra}"
    );
    std::fs::write(&cfg, text).unwrap();
    cfg
}

fn pursuit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pursuit")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_trace_and_result() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), "");
    let out = dir.path().join("out");
    let o = pursuit(&["run", "--config", s(&cfg), "--mode", "mtra", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(result["mode"], "MTRA");
    assert_eq!(result["seed"], 4);
    let trace = std::fs::read_to_string(out.join("trace.jsonl")).unwrap();
    let lines: Vec<serde_json::Value> = trace.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len() as u64, result["steps"].as_u64().unwrap());
    for (k, rec) in lines.iter().enumerate() {
        assert_eq!(rec["schema_version"], 1);
        assert_eq!(rec["step"], k as u64 + 1);
        assert_eq!(rec["pursuers"].as_array().unwrap().len(), 5);
        assert_eq!(rec["evaders"].as_array().unwrap().len(), 3);
    }
}

#[test]
fn step_limit_produces_timeout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), "");
    let out = dir.path().join("out");
    let o = pursuit(&["run", "--config", s(&cfg), "--max-steps", "1", "--out", s(&out)]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("timeout"));
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(result["timed_out"], true);
    assert!(result["total_capture_time"].is_null());
}

#[test]
fn missing_map_and_bad_config_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, "[map]\npath = \"nowhere.map\"\n").unwrap();
    let o = pursuit(&["run", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nowhere.map"));

    std::fs::write(&cfg, "[map]\npath = \"m.map\"\n[pursuers]\ncount = \"five\"\n").unwrap();
    let o = pursuit(&["batch", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
}

#[test]
fn batch_noise_sweep_layout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), "");
    let out = dir.path().join("sweep");
    let o = pursuit(&[
        "batch",
        "--config",
        s(&cfg),
        "--mode",
        "TTRA,NNA",
        "--k2",
        "0.1,0.5",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for level in ["k2_0.1", "k2_0.5"] {
        let summary = std::fs::read_to_string(out.join(level).join("summary.csv")).unwrap();
        let rows: Vec<&str> = summary.lines().collect();
        assert_eq!(rows[0], "mode,n,mean_total,std_total,mean_max,std_max,timeouts");
        assert!(rows[1].starts_with("TTRA,") && rows[2].starts_with("NNA,"));
        let episodes = std::fs::read_to_string(out.join(level).join("episodes.jsonl")).unwrap();
        assert_eq!(episodes.lines().count(), 4);
        let winrates = std::fs::read_to_string(out.join(level).join("winrates.csv")).unwrap();
        assert!(winrates.starts_with("mode,baseline,metric,wins,runs,win_rate\n"));
    }
    let sweep = std::fs::read_to_string(out.join("noise_sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 5);
    assert!(sweep.lines().nth(1).unwrap().starts_with("0.1,TTRA,"));
}

#[test]
fn validate_reports_and_detects_faults() {
    let o = pursuit(&["validate", "--seed", "3", "--cases", "20"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("pass")).count(), 4);

    let o = pursuit(&["validate", "--seed", "3", "--cases", "5", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}
