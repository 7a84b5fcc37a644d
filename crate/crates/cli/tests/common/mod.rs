#![allow(dead_code)]

use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

pub struct Run {
    pub code: i32,
    pub summary: Option<Value>,
    pub stderr: String,
    pub dir: TempDir,
}

/// Runs `wlab <command>` on `config` in a fresh directory.
pub fn wlab(command: &str, config: &Value, extra: &[&str]) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    fs::write(&cfg, serde_json::to_string_pretty(config).unwrap()).unwrap();
    wlab_in(dir, command, &cfg, extra)
}

pub fn wlab_in(dir: TempDir, command: &str, cfg: &Path, extra: &[&str]) -> Run {
    let out = dir.path().join("out");
    let res = Command::new(env!("CARGO_BIN_EXE_wlab"))
        .arg(command)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    let summary = fs::read_to_string(out.join(format!("{command}.json")))
        .ok()
        .map(|t| serde_json::from_str(&t).unwrap());
    Run {
        code: res.status.code().unwrap_or(-1),
        summary,
        stderr: String::from_utf8_lossy(&res.stderr).into_owned(),
        dir,
    }
}

/// The `passed` flag of the named check.
pub fn check(summary: &Value, name: &str) -> (f64, bool) {
    let c = summary["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name} in {summary}"));
    (c["value"].as_f64().unwrap_or(f64::NAN), c["passed"].as_bool().unwrap())
}
