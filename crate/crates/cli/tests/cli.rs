//! End-to-end behaviour of the `isochiral` binary.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isochiral")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn data_lines(s: &str) -> Vec<&str> {
    s.lines().filter(|l| !l.starts_with('#')).collect()
}

fn header_value(s: &str, key: &str) -> f64 {
    s.lines()
        .filter(|l| l.starts_with('#'))
        .flat_map(|l| l.trim_start_matches('#').split_whitespace())
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing from header"))
        .parse()
        .unwrap()
}

#[test]
fn tables_are_printed_cells_and_byte_stable() {
    let a = run(&["tables"]);
    assert_eq!(a.status.code(), Some(0));
    let text = stdout(&a);
    // Header plus two endpoints for each of the 48 printed rows.
    assert_eq!(text.lines().count(), 97);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
    assert_eq!(run(&["tables"]).stdout, a.stdout);

    let ext = stdout(&run(&["tables", "--j-max", "5/2"]));
    let new_rows: Vec<&str> = ext.lines().filter(|l| l.split(',').nth(5) == Some("")).collect();
    assert_eq!(new_rows.len(), 24);
    assert!(new_rows.iter().all(|l| l.split(',').nth(2) == Some("5/2")));

    let json: serde_json::Value = serde_json::from_slice(&run(&["tables", "--format", "json"]).stdout).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 96);
}

#[test]
fn verify_passes_with_many_groups() {
    let o = run(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let props = report["properties"].as_array().unwrap();
    assert!(props.len() >= 25);
    assert!(props.iter().all(|p| p["residual"].is_number() && p["tolerance"].is_number()));
    assert_eq!(report["passed"], true);
}

#[test]
fn injected_recursion_fault_is_named() {
    let o = run(&["verify", "--only", "wigner", "--fault", "recursion-sign"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("wigner.recursion_derivative"));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["failures"], serde_json::json!(["wigner.recursion_derivative"]));
}

#[test]
fn verify_is_deterministic_and_tolerances_are_configurable() {
    let a = run(&["verify", "--only", "wigner.unitarity", "--seed", "7"]);
    assert_eq!(a.stdout, run(&["verify", "--only", "wigner.unitarity", "--seed", "7"]).stdout);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.cfg");
    std::fs::write(&cfg, "# impossible bound\ntolerance.wigner.unitarity = 0\n").unwrap();
    let o = run(&["verify", "--only", "wigner.unitarity", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn selection_truth_table_has_32_rows() {
    let o = run(&["selection"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# mode=truth rows=32 j=1,2\n"));
    let rows = data_lines(&text);
    assert_eq!(rows.len(), 33);
    let vanishing = rows.iter().filter(|l| l.ends_with(",vanishes")).count();
    assert_eq!(vanishing, 16);
}

#[test]
fn expectation_trivial_case_is_cos_2gamma() {
    let o = run(&["expectation", "--a", "0+0i", "--gamma-points", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("# a=0+0i"));
    let rows = data_lines(&text);
    assert_eq!(rows.len(), 10);
    for line in &rows[1..] {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0], "trivial");
        let gamma: f64 = f[3].parse().unwrap();
        let value: f64 = f[7].parse().unwrap();
        assert!((value - (2.0 * gamma).cos()).abs() < 1e-14);
    }
}

#[test]
fn radial_j0_matches_closed_form() {
    let o = run(&["radial", "--j", "0", "--grid-r", "0.1:10:60"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("# case_tag=j0_free\n"));
    assert!(header_value(&text, "closed_form_deviation") < 1e-8);
    assert_eq!(data_lines(&text).len(), 61);
}

#[test]
fn radial_k_reduced_json_has_metadata() {
    let o = run(&["radial", "--j", "2", "--mu", "-1", "--format", "json", "--grid-r", "0.5:6:20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["case_tag"], "k_reduced");
    assert_eq!(v["j"], "2");
    assert!(v["closed_form_deviation"].as_f64().unwrap() < 1e-8);
}

#[test]
fn incompatible_radial_request_is_structured() {
    let o = run(&["radial", "--profile", "free", "--a", "0+1i"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(err["error"], "incompatible");
    assert_eq!(err["report"]["kinds"], serde_json::json!(["chiral_parameter"]));
}

#[test]
fn decompose_reports_small_residuals() {
    let o = run(&["decompose", "--j", "2", "--m", "-1", "--mu", "-1", "--a", "0.3-0.2i", "--grid-r", "0.5:4:8", "--node", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for k in ["factorization_residual", "cartesian_residual", "sigma_residual"] {
        assert!(v[k].as_f64().unwrap() < 1e-11, "{k}");
    }
    assert_eq!(v["factors"][0]["eg"], "-1/2");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["radial", "--delta", "3"]).status.code(), Some(2));
    assert_eq!(run(&["tables", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--fault", "other"]).status.code(), Some(2));
    assert_eq!(run(&["tables", "--config", "/nonexistent/cfg"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_isochiral")).arg("tables").env("ISOCHIRAL_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_is_overridden_by_flags_and_out_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("table.csv");
    std::fs::write(&cfg, format!("j_max = 3\nformat = json\nout = {}\n", out.display())).unwrap();
    let o = run(&["selection", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    // j in {1, 2, 3}: 8 sign combinations times 9 pairs.
    assert!(text.starts_with("# mode=truth rows=72 j=1,2,3\n"));
}

#[test]
fn thread_cap_does_not_change_output() {
    let capped = Command::new(env!("CARGO_BIN_EXE_isochiral"))
        .args(["verify", "--only", "discrete.involution"])
        .env("ISOCHIRAL_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(0));
    assert_eq!(capped.stdout, run(&["verify", "--only", "discrete.involution"]).stdout);
}
