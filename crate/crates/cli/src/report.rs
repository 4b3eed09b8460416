//! Report bundles and their table, JSON and CSV renderings.
//!
//! Only the JSON rendering carries a timestamp, so table and CSV output of
//! identical invocations is byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serrin_core::IdentityReport;

use crate::args::Format;

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub command: String,
    pub version: String,
    pub timestamp: String,
    pub parameters: serde_json::Value,
}

impl Metadata {
    pub fn new(command: &str, parameters: serde_json::Value) -> Metadata {
        Metadata {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            parameters,
        }
    }
}

/// Overall pass: every report whose hypotheses hold must pass.
pub fn overall_pass(reports: &[IdentityReport]) -> bool {
    reports.iter().filter(|r| r.hypothesis_met).all(|r| r.pass)
}

/// Reports of one verification run.
#[derive(Debug, Clone, Serialize)]
pub struct ReportBundle {
    pub metadata: Metadata,
    /// Solution-level quantities (slope `c`, PDE residual, mesh size, ...).
    pub diagnostics: BTreeMap<String, f64>,
    pub reports: Vec<IdentityReport>,
    pub pass: bool,
}

impl ReportBundle {
    pub fn new(metadata: Metadata, diagnostics: BTreeMap<String, f64>, reports: Vec<IdentityReport>) -> ReportBundle {
        let pass = overall_pass(&reports);
        ReportBundle {
            metadata,
            diagnostics,
            reports,
            pass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub diagnostics: BTreeMap<String, f64>,
    pub reports: Vec<IdentityReport>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepBundle {
    pub metadata: Metadata,
    pub parameter: String,
    pub rows: Vec<SweepRow>,
    /// Fitted convergence rates, only for `h` sweeps.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub rates: BTreeMap<String, f64>,
    pub pass: bool,
}

/// Fixed, locale-free number formatting shared by table and CSV output.
fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x == 0.0 {
        "0".into()
    } else {
        format!("{x:.12e}")
    }
}

fn flag(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

/// Flattens a report into `(identity.field, value)` cells.
fn report_cells(r: &IdentityReport) -> Vec<(String, String)> {
    let p = &r.name;
    let mut cells = vec![
        (format!("{p}.lhs"), num(r.lhs)),
        (format!("{p}.rhs"), num(r.rhs)),
        (format!("{p}.residual_abs"), num(r.residual_abs)),
        (format!("{p}.residual_rel"), num(r.residual_rel)),
        (format!("{p}.tolerance"), num(r.tolerance)),
        (format!("{p}.hypothesis_met"), flag(r.hypothesis_met).into()),
        (format!("{p}.pass"), flag(r.pass).into()),
    ];
    for (k, v) in &r.terms {
        cells.push((format!("{p}.{k}"), num(*v)));
    }
    cells
}

fn row_cells(diagnostics: &BTreeMap<String, f64>, reports: &[IdentityReport], pass: bool) -> Vec<(String, String)> {
    let mut cells: Vec<(String, String)> = diagnostics
        .iter()
        .map(|(k, v)| (format!("solution.{k}"), num(*v)))
        .collect();
    for r in reports {
        cells.extend(report_cells(r));
    }
    cells.push(("pass".into(), flag(pass).into()));
    cells
}

/// Writes rows of cells as CSV. Columns are the union over rows in order of
/// first appearance; missing cells are left empty.
fn write_csv(rows: &[Vec<(String, String)>]) -> String {
    let mut columns: Vec<String> = Vec::new();
    for row in rows {
        for (k, _) in row {
            if !columns.contains(k) {
                columns.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&columns).expect("in-memory write");
    for row in rows {
        let map: BTreeMap<&str, &str> = row.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
        w.write_record(columns.iter().map(|c| map.get(c.as_str()).copied().unwrap_or("")))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

fn table_reports(s: &mut String, reports: &[IdentityReport]) {
    let _ = writeln!(
        s,
        "{:<17} {:>20} {:>20} {:>12} {:>12} {:>9} {:>5} {:>5}",
        "identity", "lhs", "rhs", "abs", "rel", "tol", "hyp", "pass"
    );
    for r in reports {
        let _ = writeln!(
            s,
            "{:<17} {:>20} {:>20} {:>12.3e} {:>12.3e} {:>9.1e} {:>5} {:>5}",
            r.name,
            num(r.lhs),
            num(r.rhs),
            r.residual_abs,
            r.residual_rel,
            r.tolerance,
            if r.hypothesis_met { "yes" } else { "no" },
            if r.pass {
                "PASS"
            } else if r.hypothesis_met {
                "FAIL"
            } else {
                "-"
            },
        );
        for (k, v) in &r.terms {
            let _ = writeln!(s, "    {k:<30} {}", num(*v));
        }
        for note in &r.notes {
            let _ = writeln!(s, "    note: {note}");
        }
    }
}

fn table_diagnostics(s: &mut String, diagnostics: &BTreeMap<String, f64>) {
    for (k, v) in diagnostics {
        let _ = writeln!(s, "  {k:<28} {}", num(*v));
    }
}

pub fn render_bundle(b: &ReportBundle, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(b).expect("bundle serializes") + "\n",
        Format::Csv => write_csv(&[row_cells(&b.diagnostics, &b.reports, b.pass)]),
        Format::Table => {
            let mut s = String::new();
            let _ = writeln!(s, "{} (serrin {})", b.metadata.command, b.metadata.version);
            table_diagnostics(&mut s, &b.diagnostics);
            s.push('\n');
            table_reports(&mut s, &b.reports);
            let _ = writeln!(s, "\noverall: {}", if b.pass { "PASS" } else { "FAIL" });
            s
        }
    }
}

pub fn render_sweep(b: &SweepBundle, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(b).expect("bundle serializes") + "\n",
        Format::Csv => {
            let rows: Vec<Vec<(String, String)>> = b
                .rows
                .iter()
                .map(|row| {
                    let mut cells = vec![(b.parameter.clone(), num(row.value))];
                    cells.extend(row_cells(&row.diagnostics, &row.reports, row.pass));
                    cells
                })
                .collect();
            write_csv(&rows)
        }
        Format::Table => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "{} over {} (serrin {})",
                b.metadata.command, b.parameter, b.metadata.version
            );
            for row in &b.rows {
                let _ = writeln!(s, "\n{} = {}", b.parameter, num(row.value));
                table_diagnostics(&mut s, &row.diagnostics);
                table_reports(&mut s, &row.reports);
            }
            if !b.rates.is_empty() {
                let _ = writeln!(s, "\nfitted rates:");
                for (k, v) in &b.rates {
                    let _ = writeln!(s, "  {k:<40} {v:.4}");
                }
            }
            let _ = writeln!(s, "\noverall: {}", if b.pass { "PASS" } else { "FAIL" });
            s
        }
    }
}

/// Generic key/value records, used by `catalog` and `mesh` statistics.
pub fn render_records(title: &str, records: &[Vec<(String, String)>], format: Format) -> String {
    match format {
        Format::Csv => write_csv(records),
        Format::Json => {
            let list: Vec<serde_json::Map<String, serde_json::Value>> = records
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|(k, v)| {
                            let value = v
                                .parse::<i64>()
                                .ok()
                                .map(|i| serde_json::Value::Number(i.into()))
                                .or_else(|| {
                                    v.parse::<f64>()
                                        .ok()
                                        .and_then(serde_json::Number::from_f64)
                                        .map(serde_json::Value::Number)
                                })
                                .or_else(|| v.parse::<bool>().ok().map(serde_json::Value::Bool))
                                .unwrap_or_else(|| serde_json::Value::String(v.clone()));
                            (k.clone(), value)
                        })
                        .collect()
                })
                .collect();
            serde_json::to_string_pretty(&serde_json::json!({ title: list })).expect("records serialize") + "\n"
        }
        Format::Table => {
            let mut s = String::new();
            let Some(first) = records.first() else {
                return s;
            };
            let widths: Vec<usize> = first
                .iter()
                .enumerate()
                .map(|(i, (k, _))| records.iter().map(|r| r[i].1.len()).max().unwrap_or(0).max(k.len()))
                .collect();
            let header: Vec<String> = first
                .iter()
                .zip(&widths)
                .map(|((k, _), w)| format!("{k:<w$}"))
                .collect();
            let _ = writeln!(s, "{}", header.join("  ").trim_end());
            for r in records {
                let line: Vec<String> = r.iter().zip(&widths).map(|((_, v), w)| format!("{v:<w$}")).collect();
                let _ = writeln!(s, "{}", line.join("  ").trim_end());
            }
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serrin_core::Relation;

    fn report(name: &str, pass: bool, hyp: bool) -> IdentityReport {
        let rhs = if pass { 1.0 } else { 2.0 };
        let mut terms = BTreeMap::new();
        terms.insert("gap".to_string(), 0.5);
        IdentityReport::new(name, 1.0, rhs, Relation::Equal, 1e-8, hyp, terms)
    }

    #[test]
    fn overall_pass_ignores_unmet_hypotheses() {
        assert!(overall_pass(&[report("a", true, true), report("b", false, false)]));
        assert!(!overall_pass(&[report("a", true, true), report("b", false, true)]));
    }

    #[test]
    fn csv_columns_are_identity_fields() {
        let meta = Metadata::new("verify-ball", serde_json::json!({}));
        let mut diag = BTreeMap::new();
        diag.insert("c".to_string(), 1.0 / 3.0);
        let b = ReportBundle::new(meta, diag, vec![report("hk", true, true)]);
        let csv = render_bundle(&b, Format::Csv);
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert_eq!(
            header,
            "solution.c,hk.lhs,hk.rhs,hk.residual_abs,hk.residual_rel,hk.tolerance,hk.hypothesis_met,hk.pass,hk.gap,pass"
        );
        assert!(lines.next().unwrap().starts_with("3.333333333333e-1,1.000000000000e0,"));
        assert!(!csv.contains(&b.metadata.timestamp));
    }

    #[test]
    fn sweep_csv_fills_missing_cells() {
        let meta = Metadata::new("sweep", serde_json::json!({}));
        let rows = vec![
            SweepRow {
                value: 0.1,
                diagnostics: BTreeMap::new(),
                reports: vec![report("hk", true, true)],
                pass: true,
            },
            SweepRow {
                value: 0.2,
                diagnostics: BTreeMap::new(),
                reports: vec![IdentityReport::hypothesis_not_met("hk", "no", 1e-8)],
                pass: true,
            },
        ];
        let b = SweepBundle {
            metadata: meta,
            parameter: "radius".into(),
            rows,
            rates: BTreeMap::new(),
            pass: true,
        };
        let csv = render_sweep(&b, Format::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("radius,hk.lhs"));
        assert!(lines[2].contains("nan") && lines[2].ends_with(",,true"));
    }

    #[test]
    fn json_has_metadata_and_stable_fields() {
        let b = ReportBundle::new(
            Metadata::new("verify-ball", serde_json::json!({"n": 3})),
            BTreeMap::new(),
            vec![report("hk", true, true)],
        );
        let v: serde_json::Value = serde_json::from_str(&render_bundle(&b, Format::Json)).unwrap();
        assert_eq!(v["metadata"]["command"], "verify-ball");
        assert!(v["metadata"]["timestamp"].is_string());
        assert_eq!(v["reports"][0]["name"], "hk");
        assert_eq!(v["pass"], true);
    }
}
