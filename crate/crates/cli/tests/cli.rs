use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aeroprint")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Rectangle mission with 60 l per robot and a 0.05 s buffer.
fn gen_rect(dir: &TempDir) -> PathBuf {
    let out = path(dir, "r18.json");
    let r = run(&["gen", "rect", "--size", "2", "2", "0.5", "--grid", "3", "3", "2", "--capacity", "60", "--delta", "0.05", "-o", s(&out)]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    out
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn gen_writes_tasks() {
    let dir = TempDir::new().unwrap();
    let r18 = read_json(&gen_rect(&dir));
    assert_eq!(r18["tasks"].as_array().unwrap().len(), 18);

    let one = path(&dir, "one.json");
    assert_eq!(code(&run(&["gen", "rect", "--grid", "1", "1", "1", "-o", s(&one)])), 0);
    assert_eq!(read_json(&one)["tasks"].as_array().unwrap().len(), 1);
}

#[test]
fn gen_without_output_is_usage_error() {
    let r = run(&["gen", "rect", "--grid", "3", "3", "2"]);
    assert_eq!(code(&r), 2);
    assert!(String::from_utf8_lossy(&r.stderr).contains("Usage"));
}

#[test]
fn plan_then_validate() {
    let dir = TempDir::new().unwrap();
    let mission = gen_rect(&dir);
    let plan = path(&dir, "p1.json");
    let r = run(&["plan", s(&mission), "--robots", "6", "--variant", "p1", "-o", s(&plan)]);
    assert_eq!(code(&r), 0);
    assert!(stdout(&r).starts_with("status=optimal"));
    assert!(stdout(&r).contains("makespan_s="));
    let schedule = read_json(&plan);
    assert_eq!(schedule["variant"], "p1");
    assert_eq!(schedule["params_used"]["fifo_buffer"], 0.05);
    let assignments = schedule["assignments"].as_array().unwrap();
    assert_eq!(assignments.len(), 18);
    assert!(assignments.iter().all(|a| a["robot"].as_u64().unwrap() < 6));

    let svg = path(&dir, "gantt.svg");
    let csv = path(&dir, "gantt.csv");
    let report = path(&dir, "report.json");
    let v = run(&["validate", s(&mission), s(&plan), "--dt", "0.1", "--svg", s(&svg), "--csv", s(&csv), "-o", s(&report)]);
    assert_eq!(code(&v), 0, "{}", stdout(&v));
    let min = read_json(&report)["simulation"]["global_min_distance_m"].as_f64().unwrap();
    assert!(min >= 1.0 - 2.0 * 0.1 * 0.1);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(csv_text.lines().next(), Some("task,robot,start_s,print_start_s,print_end_s,complete_s"));
    assert_eq!(csv_text.lines().count(), 19);
}

#[test]
fn p3_uses_fewer_robots_consistently() {
    let dir = TempDir::new().unwrap();
    let mission = gen_rect(&dir);
    let plan = path(&dir, "p3.json");
    let r = run(&["plan", s(&mission), "--robots", "6", "--variant", "p3", "--gut", "100", "-o", s(&plan)]);
    assert_eq!(code(&r), 0);
    let schedule = read_json(&plan);
    let mut used: Vec<u64> = schedule["assignments"].as_array().unwrap().iter().map(|a| a["robot"].as_u64().unwrap()).collect();
    used.sort_unstable();
    used.dedup();
    assert!(used.len() < 6);
    assert_eq!(schedule["objective_terms"]["j_ut"].as_f64().unwrap(), used.len() as f64);
    assert!(stdout(&r).contains(&format!("used={}", used.len())));
}

#[test]
fn tampered_schedule_fails_validation() {
    let dir = TempDir::new().unwrap();
    let mission = gen_rect(&dir);
    let plan = path(&dir, "p1.json");
    assert_eq!(code(&run(&["plan", s(&mission), "--robots", "6", "-o", s(&plan)])), 0);
    // Shift the successor of the tightest dependency 50 s earlier.
    let csv = path(&dir, "g.csv");
    assert_eq!(code(&run(&["validate", s(&mission), s(&plan), "--csv", s(&csv)])), 0);
    let rows: Vec<Vec<f64>> = std::fs::read_to_string(&csv)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    let edges = read_json(&mission)["dependencies"].clone();
    let (_, succ) = edges
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e[0].as_u64().unwrap() as usize, e[1].as_u64().unwrap() as usize))
        .map(|(i, j)| (rows[j][3] - rows[i][4], j))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap();
    let mut schedule = read_json(&plan);
    let start = schedule["assignments"][succ]["start_s"].as_f64().unwrap();
    schedule["assignments"][succ]["start_s"] = (start - 50.0).into();
    let tampered = path(&dir, "tampered.json");
    std::fs::write(&tampered, serde_json::to_string(&schedule).unwrap()).unwrap();
    let r = run(&["validate", s(&mission), s(&tampered)]);
    assert_eq!(code(&r), 5);
    assert!(stdout(&r).contains("violation precedence"));
}

#[test]
fn plan_exit_codes() {
    let dir = TempDir::new().unwrap();
    let mission = gen_rect(&dir);
    let out = path(&dir, "x.json");
    assert_eq!(code(&run(&["plan", s(&mission), "--robots", "0", "-o", s(&out)])), 2);
    assert_eq!(code(&run(&["plan", s(&mission), "--robots", "2..4", "-o", s(&out)])), 2);
    let r = run(&["plan", s(&mission), "--robots", "3", "-o", s(&out)]);
    assert_eq!(code(&r), 4);
    assert!(stdout(&r).contains("infeasible: material"));

    let open = path(&dir, "open.json");
    assert_eq!(code(&run(&["gen", "rect", "--delta", "0.05", "-o", s(&open)])), 0);
    let r = run(&["plan", s(&open), "--robots", "2", "--time-limit", "0.001", "-o", s(&out)]);
    assert_eq!(code(&r), 3, "{}", stdout(&r));
}

#[test]
fn sweep_flags_infeasible_rows() {
    let dir = TempDir::new().unwrap();
    let mission = gen_rect(&dir);
    let r = run(&["sweep", s(&mission), "--robots", "1..8", "--variant", "p1"]);
    assert_eq!(code(&r), 0);
    let text = stdout(&r);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("M,status,makespan_s,objective,used_robots,wall_s"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[0][1], "infeasible");
    let spans: Vec<f64> = rows.iter().filter(|r| r[1] == "optimal").map(|r| r[2].parse().unwrap()).collect();
    assert!(!spans.is_empty());
    assert!(spans.windows(2).all(|w| w[1] <= w[0] + 1e-6));
}

#[test]
fn export_lp_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let mission = path(&dir, "small.json");
    assert_eq!(code(&run(&["gen", "rect", "--size", "2", "2", "0.25", "--grid", "2", "1", "1", "-o", s(&mission)])), 0);
    let (a, b) = (path(&dir, "a.lp"), path(&dir, "b.lp"));
    assert_eq!(code(&run(&["export-lp", s(&mission), "--variant", "p1", "--robots", "2", "-o", s(&a)])), 0);
    assert_eq!(code(&run(&["export-lp", s(&mission), "--variant", "p1", "--robots", "2", "-o", s(&b)])), 0);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(text.contains("Minimize") && text.contains("Subject To") && text.trim_end().ends_with("End"));
    assert!(!text.contains(" u_0"));

    assert_eq!(code(&run(&["export-lp", s(&mission), "--variant", "p3", "--robots", "2", "-o", s(&a)])), 0);
    let p3 = std::fs::read_to_string(&a).unwrap();
    let binaries = p3.split("Binaries").nth(1).unwrap();
    assert!(binaries.contains("u_0") && binaries.contains("u_1"));
}

#[test]
fn plans_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let mission = gen_rect(&dir);
    let (a, b) = (path(&dir, "a.json"), path(&dir, "b.json"));
    assert_eq!(code(&run(&["plan", s(&mission), "--robots", "5", "--variant", "p2", "-o", s(&a)])), 0);
    assert_eq!(code(&run(&["plan", s(&mission), "--robots", "5", "--variant", "p2", "--threads", "1", "-o", s(&b)])), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
