//! Report persistence: report.json (full, schema-versioned), report.csv
//! (one row per j, fixed column set), and plotdata/*.dat two-column
//! series. All output is deterministic for a fixed config.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use warplab_core::report::ConvergenceReport;

/// CSV header, in the emitted order. Optional lattice columns are left
/// empty when the run skipped the shortest-path stage. `failed_checks`
/// holds semicolon-joined names of failing applicable checks.
pub const CSV_COLUMNS: &str = "j,r_min,volume,diameter,diameter_error,area_0,area_1,area_2,\
l2_centered_log,w12_primary,w12_secondary,c0_primary,d_unif,d_unif_lattice,\
checks_passed,checks_total,failed_checks";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn render_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from(CSV_COLUMNS);
    out.push('\n');
    for row in &report.rows {
        let passed = row.checks.iter().filter(|c| c.applicable && c.pass).count();
        let failed: Vec<&str> =
            row.checks.iter().filter(|c| c.failed()).map(|c| c.name.as_str()).collect();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.j,
            row.r_min,
            row.volume,
            opt(row.diameter),
            opt(row.diameter_error),
            row.foliation_areas[0],
            row.foliation_areas[1],
            row.foliation_areas[2],
            row.l2_centered_log,
            row.w12_primary,
            row.w12_secondary,
            row.c0_primary,
            opt(row.d_unif),
            opt(row.d_unif_lattice),
            passed,
            row.checks.len(),
            failed.join(";"),
        ));
    }
    out
}

/// The two-column series emitted under plotdata/, as (file stem, column
/// name, per-row extractor) triples.
type Extract = fn(&warplab_core::report::ReportRow) -> Option<f64>;

const SERIES: &[(&str, Extract)] = &[
    ("r_min", |r| Some(r.r_min)),
    ("volume", |r| Some(r.volume)),
    ("diameter", |r| r.diameter),
    ("diameter_error", |r| r.diameter_error),
    ("area_0", |r| Some(r.foliation_areas[0])),
    ("area_1", |r| Some(r.foliation_areas[1])),
    ("area_2", |r| Some(r.foliation_areas[2])),
    ("l2_centered_log", |r| Some(r.l2_centered_log)),
    ("w12_primary", |r| Some(r.w12_primary)),
    ("w12_secondary", |r| Some(r.w12_secondary)),
    ("c0_primary", |r| Some(r.c0_primary)),
    ("d_unif", |r| r.d_unif),
    ("d_unif_lattice", |r| r.d_unif_lattice),
];

/// Writes report.json, report.csv, and plotdata/*.dat under `dir`.
pub fn write_report(dir: &Path, report: &ConvergenceReport) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let json = serde_json::to_string_pretty(report).context("serializing report")?;
    fs::write(dir.join("report.json"), json + "\n").context("writing report.json")?;
    fs::write(dir.join("report.csv"), render_csv(report)).context("writing report.csv")?;

    let plots = dir.join("plotdata");
    fs::create_dir_all(&plots).with_context(|| format!("creating {}", plots.display()))?;
    for (name, extract) in SERIES {
        let points: Vec<(u32, f64)> =
            report.rows.iter().filter_map(|r| extract(r).map(|v| (r.j, v))).collect();
        if points.is_empty() {
            continue;
        }
        let mut body = format!("# {} vs curvature index\n# j {}\n", name, name);
        for (j, v) in points {
            body.push_str(&format!("{j} {v}\n"));
        }
        fs::write(plots.join(format!("{name}.dat")), body)
            .with_context(|| format!("writing plotdata/{name}.dat"))?;
    }
    Ok(())
}

/// One sweep row: the varied value, verdict, and headline numbers.
pub struct SweepRow {
    pub value: String,
    pub verdict: String,
    pub exit_code: i32,
    pub final_d_unif: Option<f64>,
    pub final_diameter: Option<f64>,
}

pub fn write_sweep_summary(dir: &Path, param: &str, rows: &[SweepRow]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut f = fs::File::create(dir.join("summary.csv")).context("creating summary.csv")?;
    writeln!(f, "{param},verdict,exit_code,final_d_unif,final_diameter")?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{}",
            r.value,
            r.verdict,
            r.exit_code,
            opt(r.final_d_unif),
            opt(r.final_diameter)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use warplab_core::report::{CheckEntry, LimitSummary, ReportRow, Verdict};

    fn tiny_report() -> ConvergenceReport {
        ConvergenceReport {
            schema_version: 1,
            family: "doubly".into(),
            rows: vec![ReportRow {
                j: 10,
                r_min: -0.001,
                volume: 248.05,
                diameter: None,
                diameter_error: None,
                foliation_areas: [39.478, 39.478, 39.478],
                l2_centered_log: 0.01,
                w12_primary: 0.02,
                w12_secondary: 0.02,
                c0_primary: 0.005,
                d_unif: None,
                d_unif_lattice: None,
                checks: vec![
                    CheckEntry::upper("residual", 0.01, 0.05, 1e-8),
                    CheckEntry::upper("bad", 1.0, 0.5, 0.0),
                ],
            }],
            sequence_checks: vec![],
            rates: vec![],
            limit: LimitSummary::Doubly { a_inf: 1.0, b_inf: 1.0 },
            verdict: Verdict::Inconclusive,
            verdict_reasons: vec![],
        }
    }

    #[test]
    fn csv_has_fixed_header_and_optional_blanks() {
        let csv = render_csv(&tiny_report());
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS);
        let row = lines.next().unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 17);
        assert_eq!(fields[0], "10");
        assert_eq!(fields[3], "", "diameter empty without lattice");
        assert_eq!(fields[14], "1", "one passing check");
        assert_eq!(fields[15], "2");
        assert_eq!(fields[16], "bad");
    }

    #[test]
    fn report_files_land_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        write_report(dir.path(), &tiny_report()).unwrap();
        assert!(dir.path().join("report.json").is_file());
        assert!(dir.path().join("report.csv").is_file());
        assert!(dir.path().join("plotdata/w12_primary.dat").is_file());
        assert!(
            !dir.path().join("plotdata/d_unif.dat").exists(),
            "empty series are not emitted"
        );
        let dat = fs::read_to_string(dir.path().join("plotdata/w12_primary.dat")).unwrap();
        assert!(dat.starts_with("# w12_primary"));
        assert!(dat.lines().last().unwrap().starts_with("10 "));
    }
}
