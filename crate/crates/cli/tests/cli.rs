use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use euler_mmot::euler::gerosplan_plan;
use euler_mmot::TransportPlan;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_euler-mmot"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

fn line<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no '{key}' line in\n{text}"))
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn solve_three_point_n4() {
    let out = run(&["solve", "--grid", "three-point", "--steps", "4", "--endpoint", "flip", "--arith", "rational"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(line(&text, "value"), "16/9");
    assert_eq!(line(&text, "splitting"), "t0=true t1=true t2=true t3=true t4=true");
    assert_eq!(line(&text, "everywhere-splitting"), "true");
}

#[test]
fn solve_three_point_n3_defaults_to_exact() {
    let out = run(&["solve", "--grid", "three-point", "--steps", "3", "--endpoint", "flip"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(line(&stdout(&out), "value"), "2");
}

#[test]
fn solve_reduced_form_agrees() {
    let out = run(&["solve", "--steps", "5", "--form", "reduced"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(line(&stdout(&out), "value"), "5/3");
}

#[test]
fn solve_midpoint_grid_in_float_mode() {
    let out = run(&["solve", "--grid", "midpoint:8", "--steps", "3", "--endpoint", "flip", "--arith", "float"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let value: f64 = line(&stdout(&out), "value").parse().unwrap();
    assert!((0.9..=1.1).contains(&value), "{value}");
}

#[test]
fn solve_writes_a_loadable_plan() {
    let dir = scratch_dir("solve_plan");
    let path = dir.join("plan.json");
    let out = run(&["solve", "--steps", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let plan = TransportPlan::from_json_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(plan, gerosplan_plan(4).unwrap());
}

#[test]
fn solve_is_deterministic() {
    let args = ["solve", "--steps", "5"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn solve_errors_map_to_exit_codes() {
    // flip is undefined on an asymmetric grid: usage error
    let out = run(&["solve", "--grid", "points:-1,0,2", "--steps", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("endpoint"));
    // path cap below the path count: resource limit
    let out = run(&["solve", "--steps", "4", "--path-cap", "10"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    // pivot cap hit before optimality
    let out = run(&["solve", "--steps", "5", "--max-pivots", "2"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("resource limit"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["solve", "--grid", "hexagon"]).status.code(), Some(1));
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn prop1_rows() {
    let out = run(&["prop1", "--from", "3", "--to", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["n", "lp", "closed", "gamma0", "monge", "split", "width"]);
    let rows: Vec<Vec<String>> = reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    assert_eq!(rows[0], ["3", "2", "2", "2", "2", "not-asserted", "1/3"]);
    assert_eq!(rows[1], ["4", "16/9", "16/9", "16/9", "2", "true", "0"]);
    assert_eq!(rows[2], ["5", "5/3", "5/3", "5/3", "2", "true", "1/6"]);
}

#[test]
fn prop1_skips_monge_beyond_cap() {
    let out = run(&["prop1", "--from", "4", "--to", "4", "--monge-cap", "10"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains(",skipped,"));
    assert!(stderr(&out).contains("skipped"));
}

#[test]
fn prop1_rejects_bad_range() {
    assert_eq!(run(&["prop1", "--from", "2", "--to", "4"]).status.code(), Some(1));
}

#[test]
fn thm1_n8_reports_splitting_pattern() {
    let dir = scratch_dir("thm1");
    let out = run(&["thm1", "--n", "8", "--out-dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("gamma0: atoms=32"));
    assert!(text
        .lines()
        .any(|l| l.starts_with("gamma0:") && l.ends_with("t0=true t1=true t2=true t3=true")));
    assert!(text.lines().any(|l| l.starts_with("gamma1:") && l.contains("t0=false")));
    assert!(!text.contains("FAIL"));
    for name in ["gamma0", "gamma1", "gamma2"] {
        let plan = std::fs::read_to_string(dir.join(format!("{name}.json"))).unwrap();
        assert!(TransportPlan::from_json_str(&plan).is_ok());
    }
}

#[test]
fn thm1_n16_cost_within_quarter() {
    let out = run(&["thm1", "--n", "16"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("check pass: |cost(gamma0) - 1| <= 4/16"));
}

#[test]
fn thm1_odd_resolution_is_usage_error() {
    assert_eq!(run(&["thm1", "--n", "7"]).status.code(), Some(1));
}

#[test]
fn sweep_small_instances() {
    let out = run(&[
        "sweep", "--grid", "three-point", "--grid", "midpoint:4", "--steps", "3,4", "--grid", "points:-1,0,2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 6);
    for row in &rows[..4] {
        assert_eq!(&row[2], "optimal");
        let steps: usize = row[1].parse().unwrap();
        assert_eq!(row[4].len(), steps + 1);
    }
    let midpoint_n3: f64 = rows[2][3].parse().unwrap();
    assert!((0.8..=1.2).contains(&midpoint_n3), "{midpoint_n3}");
    // the asymmetric grid has no flip; the row records the error and the sweep continues
    assert_eq!(&rows[4][2], "error");
    assert!(rows[4][8].contains("endpoint"));
}

#[test]
fn sweep_without_instances_prints_header() {
    let out = run(&["sweep"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "grid,steps,status,value,splitting,monge,pivots,seconds,error\n");
}

#[test]
fn render_svg_and_ascii() {
    let dir = scratch_dir("render");
    let plan_path = dir.join("gamma0.json");
    std::fs::write(&plan_path, gerosplan_plan(4).unwrap().to_json_string()).unwrap();
    let svg_path = dir.join("gamma0.svg");
    let out = run(&["render", plan_path.to_str().unwrap(), "--out", svg_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 9);
    let out = run(&["render", plan_path.to_str().unwrap(), "--format", "ascii", "--columns", "41", "--rows", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 5);
    assert!(text.contains('#'));
}

#[test]
fn render_rejects_corrupted_plan() {
    let dir = scratch_dir("render_bad");
    let path = dir.join("bad.json");
    std::fs::write(&path, "{\n  \"grid\": [\"-1\", \"0\"\n").unwrap();
    let out = run(&["render", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line"), "{}", stderr(&out));
    let out = run(&["render", dir.join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_round_trip() {
    let dir = scratch_dir("config");
    let out = run(&["--print-config", "solve", "--steps", "4", "--grid", "three-point"]);
    assert_eq!(out.status.code(), Some(0));
    let config_path = dir.join("run.json");
    std::fs::write(&config_path, &out.stdout).unwrap();
    let printed_again = run(&["--print-config", "--config", config_path.to_str().unwrap()]);
    assert_eq!(printed_again.stdout, out.stdout);
    let via_config = run(&["--config", config_path.to_str().unwrap()]);
    let via_flags = run(&["solve", "--steps", "4", "--grid", "three-point"]);
    assert_eq!(via_config.status.code(), Some(0));
    assert_eq!(via_config.stdout, via_flags.stdout);
    assert_eq!(
        run(&["--config", config_path.to_str().unwrap(), "solve"]).status.code(),
        Some(1)
    );
}
