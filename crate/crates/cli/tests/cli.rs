// Copyright 2026 The dpbins Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! End-to-end runs of the `dpbins` binary.

use std::path::Path;
use std::process::{Command, Output};

fn dpbins(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpbins"))
        .args(args)
        .env_remove("DPBINS_SEED")
        .output()
        .expect("spawn dpbins")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn partition_emits_json_buckets() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "s.csv", "value\n70\n71\n72\n73\n120\n");
    let out = ok(&dpbins(&[
        "partition",
        "--input",
        &input,
        "--seed",
        "1",
        "--zero-noise",
    ]));
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    let ranges: Vec<(u64, u64)> = doc["partition"]["buckets"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| (b["start"].as_u64().unwrap(), b["end"].as_u64().unwrap()))
        .collect();
    assert_eq!(ranges, vec![(1, 3), (4, 4), (5, 5)]);
    assert_eq!(doc["randomized"]["t_r_hat"], 15.0);

    let out = ok(&dpbins(&[
        "partition",
        "--input",
        &input,
        "--seed",
        "1",
        "--zero-noise",
        "--algorithm",
        "baseline",
    ]));
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["partition"]["buckets"].as_array().unwrap().len(), 2);
}

#[test]
fn partition_aggregates_windows() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "s.csv", "0,60\n60,62\n120,64\n180,66\n240,68\n");
    let out = ok(&dpbins(&[
        "partition",
        "--input",
        &input,
        "--window",
        "2",
        "--seed",
        "1",
        "--zero-noise",
    ]));
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    let values = &doc["partition"]["buckets"][0]["values"];
    assert_eq!(values, &serde_json::json!([61.0, 65.0, 68.0]));
}

#[test]
fn release_writes_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "s.csv", "70\n72\n");
    let out_path = dir.path().join("r.csv");
    ok(&dpbins(&[
        "release",
        "--input",
        &input,
        "--seed",
        "3",
        "--zero-noise",
        "--output",
        out_path.to_str().unwrap(),
    ]));
    let text = std::fs::read_to_string(out_path).unwrap();
    assert_eq!(
        text,
        "bin_index,original_absent,released_value,bucket_index\n1,true,71.0,1\n2,true,71.0,1\n"
    );
}

#[test]
fn release_json_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "s.csv", "value\n70\n72\n99\n98\n");
    let args = [
        "release", "--input", &input, "--seed", "5", "--format", "json",
    ];
    let a = ok(&dpbins(&args));
    let b = ok(&dpbins(&args));
    assert_eq!(a, b);
    let parsed: dpbins::ReleasedSeries = serde_json::from_str(&a).unwrap();
    assert_eq!(parsed.values.len(), 4);
}

#[test]
fn malformed_input_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "s.csv", "value\n70\nseventy\n");
    let out = dpbins(&["partition", "--input", &input, "--seed", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn seed_is_required_unless_env_set() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "s.csv", "70\n");
    assert!(!dpbins(&["partition", "--input", &input]).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_dpbins"))
        .args(["partition", "--input", &input])
        .env("DPBINS_SEED", "9")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn verify_dp_passes() {
    let out = ok(&dpbins(&["verify-dp"]));
    assert_eq!(out.matches("PASS").count(), 4);
    assert!(!out.contains("FAIL"));
}

#[test]
fn synth_writes_series_and_jumps() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("s.csv");
    let jumps = dir.path().join("j.txt");
    ok(&dpbins(&[
        "synth",
        "--length",
        "50",
        "--jump-count",
        "4",
        "--seed",
        "2",
        "--output",
        series.to_str().unwrap(),
        "--jumps-out",
        jumps.to_str().unwrap(),
    ]));
    let text = std::fs::read_to_string(&series).unwrap();
    assert_eq!(text.lines().count(), 51);
    assert_eq!(std::fs::read_to_string(&jumps).unwrap().lines().count(), 4);

    let bad = dpbins(&["synth", "--length", "5", "--jump-count", "4", "--seed", "2"]);
    assert!(!bad.status.success());
}

#[test]
fn experiment_writes_summary_trace_and_trials() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.csv");
    let trace = dir.path().join("trace.csv");
    let trials = dir.path().join("trials.csv");
    ok(&dpbins(&[
        "experiment",
        "--seed",
        "1",
        "--trials",
        "4",
        "--zero-noise",
        "--set",
        "synthetic.length=100",
        "--set",
        "synthetic.jump_count=6",
        "--summary",
        summary.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
        "--trials-out",
        trials.to_str().unwrap(),
    ]));
    let s = std::fs::read_to_string(summary).unwrap();
    assert!(s.starts_with("algorithm,variant,trials,preservation_mean"));
    assert!(s.contains("pattern_preserving,default,4,100,0,"));
    assert_eq!(std::fs::read_to_string(trace).unwrap().lines().count(), 101);
    assert_eq!(
        std::fs::read_to_string(trials).unwrap().lines().count(),
        1 + 4 * 3
    );
}

#[test]
fn experiment_on_recorded_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "hr.csv",
        "value\n70\n71\n72\n100\n101\n99\n60\n61\n",
    );
    let config = write(
        dir.path(),
        "exp.cfg",
        &format!("input = {input}\nwindow = 1\nbaseline_t_d_variants = 30\n"),
    );
    let summary = dir.path().join("summary.csv");
    ok(&dpbins(&[
        "experiment",
        "--config",
        &config,
        "--seed",
        "0",
        "--trials",
        "3",
        "--zero-noise",
        "--summary",
        summary.to_str().unwrap(),
    ]));
    let s = std::fs::read_to_string(summary).unwrap();
    assert!(s.contains("pattern_preserving,default,3,100,"));
    assert!(s.contains("baseline,t_d=30,3,"));
}

#[test]
fn experiment_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "exp.cfg", "t_d = 30\nnot_a_key = 4\n");
    let out = dpbins(&[
        "experiment",
        "--config",
        &config,
        "--seed",
        "0",
        "--trials",
        "1",
        "--summary",
        dir.path().join("s.csv").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("config line 2"));
}
