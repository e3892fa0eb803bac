use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dynstc_cli::{cmd_bench, CommandArgs};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn dynstc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynstc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn certify_example1(dir: &Path) -> PathBuf {
    let bank = dir.join("ex1.bank.json");
    let cfg = configs().join("example1_certify.json");
    let out = dynstc(&["certify", "--config", path(&cfg), "--bank", path(&bank)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    bank
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(code(&dynstc(&[])), 1);
    assert_eq!(code(&dynstc(&["frobnicate"])), 1);
    assert_eq!(code(&dynstc(&["simulate"])), 1);
    assert_eq!(
        code(&dynstc(&["simulate", "--config", "/nonexistent.json"])),
        1
    );
    assert_eq!(code(&dynstc(&["--help"])), 0);

    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(dir.path(), "u.json", r#"{"system":"example1","bogus":1}"#);
    assert_eq!(code(&dynstc(&["simulate", "--config", path(&unknown)])), 1);
    let empty_grid = write_config(
        dir.path(),
        "g.json",
        r#"{"system":"example1","epsilon_grid":[]}"#,
    );
    assert_eq!(
        code(&dynstc(&["certify", "--config", path(&empty_grid)])),
        1
    );
    let cfg = configs().join("example1_ref.json");
    let out = dynstc(&["simulate", "--config", path(&cfg), "--dt", "-1"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn infeasible_design_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "unstable.json",
        r#"{"system":{"linear":{"a":[[1.0,0.0],[0.0,1.0]],"b":[[0.1,0.0],[0.0,0.1]],"e":[[0.0],[1.0]],"p":[[1.0,0.0],[0.0,1.0]]}},"epsilon_grid":[0.1,-1.0],"theta":1.0}"#,
    );
    let out = dynstc(&["certify", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bound_violation_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let bank = certify_example1(dir.path());
    let mut doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&bank).unwrap()).unwrap();
    for level in doc["levels"].as_array_mut().unwrap() {
        for set in level["sets"].as_array_mut().unwrap() {
            let g = set["gamma"].as_f64().unwrap();
            set["gamma"] = serde_json::json!(g * 1e-3);
        }
    }
    let bad = dir.path().join("bad.bank.json");
    fs::write(&bad, doc.to_string()).unwrap();
    let cfg = configs().join("example1_ref.json");
    let out = dynstc(&[
        "simulate",
        "--config",
        path(&cfg),
        "--bank",
        path(&bad),
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("example1-ref.summary.json")).unwrap(),
    )
    .unwrap();
    assert!(summary["bound_check"]["violation_count"].as_u64().unwrap() > 0);
}

#[test]
fn start_outside_region_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "far.json",
        r#"{"system":"example2","mechanism":{"kind":"ref"},"x0":[10.0,10.0],"c_levels":[1.0,37.87]}"#,
    );
    let out = dynstc(&[
        "simulate",
        "--config",
        path(&cfg),
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let bank = certify_example1(dir.path());
    let cfg = configs().join("example1_fir.json");
    let out = dynstc(&[
        "simulate",
        "--config",
        path(&cfg),
        "--bank",
        path(&bank),
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("example1-fir.csv")).unwrap();
    assert!(csv.starts_with("t,j,x1,x2,V,interval,event_flag,level,fallback_flag\n"));
    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("example1-fir.summary.json")).unwrap(),
    )
    .unwrap();
    for key in ["num_events", "min_interval", "max_interval", "final_V"] {
        assert!(summary.get(key).is_some(), "missing {key}");
    }
    let events = summary["num_events"].as_u64().unwrap() as usize;
    let flagged = csv
        .lines()
        .skip(1)
        .filter(|l| l.split(',').nth(6) == Some("1"))
        .count();
    assert_eq!(events, flagged);
}

#[test]
fn certify_is_seed_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("example1_certify.json");
    let run = |seed: &str, name: &str| {
        let bank = dir.path().join(name);
        let out = dynstc(&[
            "certify",
            "--config",
            path(&cfg),
            "--bank",
            path(&bank),
            "--seed",
            seed,
        ]);
        assert_eq!(code(&out), 0);
        let table: String = String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("bank written"))
            .collect();
        (table, fs::read_to_string(bank).unwrap())
    };
    assert_eq!(run("7", "a.json"), run("7", "b.json"));
}

#[test]
fn empty_bench_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("bench_empty.json");
    let out = dynstc(&["bench", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("12907"));
}

#[test]
fn bench_is_byte_reproducible() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let outputs: Vec<_> = dirs
        .iter()
        .map(|d| {
            let args = CommandArgs {
                config: Some(configs().join("bench_example1.json")),
                out: Some(d.path().to_path_buf()),
                ..CommandArgs::default()
            };
            cmd_bench(&args).unwrap()
        })
        .collect();
    assert_eq!(outputs[0].table, outputs[1].table);
    assert_eq!(outputs[0].csv, outputs[1].csv);
    assert!(outputs[0].table.contains("external, not reproduced"));
    let mut files: Vec<_> = fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    files.sort();
    assert!(files.len() >= 10);
    for f in files {
        let a = fs::read(dirs[0].path().join(&f)).unwrap();
        let b = fs::read(dirs[1].path().join(&f)).unwrap();
        assert_eq!(a, b, "{f:?} differs");
    }
}
