use std::io::Write;
use std::process::Command;

use serrin_cli::{run_with, EXIT_PASS, EXIT_SOLVER, EXIT_USAGE};

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn run(args: &[&str]) -> Run {
    let argv: Vec<String> = std::iter::once("serrin")
        .chain(args.iter().copied())
        .map(String::from)
        .collect();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_with(&argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn rows(csv_text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    reader
        .records()
        .map(|r| {
            headers
                .iter()
                .map(String::from)
                .zip(r.unwrap().iter().map(String::from))
                .collect()
        })
        .collect()
}

fn num(row: &std::collections::HashMap<String, String>, key: &str) -> f64 {
    row.get(key)
        .unwrap_or_else(|| panic!("no column {key}"))
        .parse()
        .unwrap()
}

#[test]
fn ball_table_shows_zero_gap() {
    let r = run(&[
        "verify-ball",
        "--n",
        "3",
        "--k",
        "0",
        "--radius",
        "1",
        "--identities",
        "all",
        "--format",
        "table",
    ]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.err);
    let gap_line = r.out.lines().find(|l| l.trim_start().starts_with("gap ")).unwrap();
    let gap: f64 = gap_line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(gap.abs() <= 1e-8);
}

#[test]
fn ellipse_reports_positive_gap() {
    let r = run(&[
        "verify-fem",
        "--domain",
        "ellipse",
        "--a",
        "1.5",
        "--b",
        "1",
        "--k",
        "0",
        "--h",
        "0.05",
        "--identities",
        "hk,soap,pohozaev-general,minkowski-proof",
        "--format",
        "json",
    ]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.err);
    let v: serde_json::Value = serde_json::from_str(&r.out).unwrap();
    let hk = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == "hk")
        .unwrap();
    assert!(hk["terms"]["gap"].as_f64().unwrap() > 1.0);
}

#[test]
fn hemisphere_radius_is_a_solver_error() {
    let r = run(&["verify-ball", "--n", "3", "--k", "1", "--radius", "1.6"]);
    assert_eq!(r.code, EXIT_SOLVER);
    assert!(r.out.is_empty());
    assert!(r.err.contains("positivity"), "{}", r.err);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["verify-ball", "--radius", "abc"][..],
        &["verify-ball", "--bogus"],
        &["frobnicate"],
        &["verify-ball", "--identities", "nonsense"],
        &["verify-ball", "--warp", "custom:t +"],
        &["sweep", "--param", "radius", "--values", "0.5,0.3,0.7"],
        &["sweep", "--param", "eps", "--target", "ball", "--values", "0,0.1"],
        &["verify-slab", "--a", "2", "--b", "1"],
    ] {
        let r = run(args);
        assert_eq!(r.code, EXIT_USAGE, "{args:?}: {}", r.err);
        assert!(!r.err.is_empty());
    }
}

#[test]
fn help_and_version_exit_0() {
    let r = run(&["--help"]);
    assert_eq!(r.code, EXIT_PASS);
    assert!(r.out.contains("verify-ball"));
    assert_eq!(run(&["--version"]).code, EXIT_PASS);
}

#[test]
fn config_supplies_defaults_and_flags_win() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "# ball defaults\nn = 5\nradius = 0.5\nformat = json").unwrap();
    let path = file.path().to_str().unwrap();

    let r = run(&["--config", path, "verify-ball", "--identities", "hk"]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.err);
    let v: serde_json::Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(v["metadata"]["parameters"]["model"]["n"], 5);
    assert_eq!(v["metadata"]["parameters"]["radius"], 0.5);

    let r = run(&["verify-ball", "--config", path, "--n", "2", "--identities", "hk"]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.err);
    let v: serde_json::Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(v["metadata"]["parameters"]["model"]["n"], 2);
    assert_eq!(v["metadata"]["parameters"]["radius"], 0.5);
}

#[test]
fn bad_config_is_a_usage_error() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "colour = blue").unwrap();
    let r = run(&["--config", file.path().to_str().unwrap(), "verify-ball"]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.err.contains("colour"), "{}", r.err);
    let r = run(&["--config", "/nonexistent/serrin.conf", "verify-ball"]);
    assert_eq!(r.code, EXIT_USAGE);
}

#[test]
fn timestamp_only_in_json() {
    let json = run(&["verify-ball", "--identities", "hk", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json.out).unwrap();
    let stamp = v["metadata"]["timestamp"].as_str().unwrap();
    assert!(chrono::DateTime::parse_from_rfc3339(stamp).is_ok(), "{stamp}");
    let csv = run(&["verify-ball", "--identities", "hk", "--format", "csv"]);
    assert_eq!(csv.code, EXIT_PASS);
    assert!(!csv.out.contains(&stamp[..10]));
}

#[test]
fn output_file_receives_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let r = run(&[
        "verify-ball",
        "--identities",
        "hk",
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.err);
    assert!(r.out.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("solution."));
}

#[test]
fn hyperbolic_radius_sweep_keeps_zero_gap() {
    let r = run(&[
        "sweep", "--param", "radius", "--from", "0.1", "--to", "2.0", "--steps", "20", "--n", "3", "--k", "-1",
        "--format", "csv",
    ]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.err);
    let rows = rows(&r.out);
    assert_eq!(rows.len(), 20);
    let radii: Vec<f64> = rows.iter().map(|r| num(r, "radius")).collect();
    assert!(radii.windows(2).all(|w| w[0] < w[1]));
    for row in &rows {
        assert!(num(row, "hk.gap").abs() <= 1e-8 * num(row, "hk.vol"), "{row:?}");
    }
}

#[test]
fn h_sweep_converges_at_first_order() {
    let r = run(&[
        "sweep",
        "--param",
        "h",
        "--values",
        "0.08,0.04,0.02",
        "--identities",
        "hk",
        "--format",
        "json",
    ]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.err);
    let v: serde_json::Value = serde_json::from_str(&r.out).unwrap();
    let flux: Vec<f64> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| (row["diagnostics"]["mean_flux"].as_f64().unwrap() - 0.5).abs())
        .collect();
    assert!(flux.windows(2).all(|w| w[1] < w[0]), "{flux:?}");
    let rate = (flux[0] / flux[2]).log2() / 2.0;
    assert!(rate >= 1.0, "rate {rate}");
}

#[test]
fn eps_sweep_gap_grows_while_mean_convex() {
    let r = run(&[
        "sweep",
        "--param",
        "eps",
        "--values",
        "0,0.04,0.08",
        "--identities",
        "hk",
        "--h",
        "0.08",
        "--format",
        "csv",
    ]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.err);
    let gaps: Vec<f64> = rows(&r.out).iter().map(|r| num(r, "hk.gap")).collect();
    assert!(gaps.windows(2).all(|w| w[1] > w[0]), "{gaps:?}");
    assert!(gaps[2] > gaps[0] + 0.1);
}

#[test]
fn eps_sweep_past_mean_convexity_flags_hypothesis() {
    let r = run(&[
        "sweep",
        "--param",
        "eps",
        "--values",
        "0.3",
        "--identities",
        "hk",
        "--h",
        "0.08",
        "--format",
        "csv",
    ]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.err);
    let rows = rows(&r.out);
    assert_eq!(rows[0]["hk.hypothesis_met"], "false");
}

#[test]
fn catalog_and_mesh_render() {
    let r = run(&["catalog", "--n", "4", "--warp", "custom:t + 0.1*t^3", "--format", "csv"]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.err);
    assert!(r.out.contains("custom:t + 0.1*t^3"));
    let r = run(&["mesh", "--domain", "disk", "--h", "0.2", "--format", "json"]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.err);
    let v: serde_json::Value = serde_json::from_str(&r.out).unwrap();
    let stats = &v["mesh"][0];
    assert_eq!(stats["euler"], 1);
    assert!(stats["vertices"].as_u64().unwrap() > 100);
}

#[test]
fn binary_exit_codes_match() {
    let bin = env!("CARGO_BIN_EXE_serrin");
    let ok = Command::new(bin)
        .args(["verify-ball", "--identities", "hk"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_PASS));
    let bad = Command::new(bin)
        .args(["verify-ball", "--n", "3", "--k", "1", "--radius", "1.6"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_SOLVER));
    assert!(bad.stdout.is_empty());
}
