use std::path::Path;

use super::DiskRow;
use super::RunReport;
use crate::diagnostics::{ScalingRecord, ScalingReport};
use crate::error::{Error, Result};

/// Files whose bytes depend only on the configuration.
pub const REPORT_FILES: [&str; 4] = ["report.json", "delta.csv", "disk.csv", "scaling.csv"];

// `Display` for f64 is the shortest decimal that round-trips.
fn num(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_delta_csv(path: &Path, rows: &[ScalingRecord]) -> Result<()> {
    write_csv(
        path,
        &[
            "n",
            "replicate",
            "z_re",
            "z_im",
            "delta",
            "ks",
            "rank_bound",
            "ibp_bound",
            "s_min_a",
            "s_min_b",
            "s_max_a",
            "s_max_b",
            "singular_flag",
        ],
        rows.iter().map(|r| {
            let d = &r.diagnostics;
            vec![
                r.n.to_string(),
                r.replicate.to_string(),
                num(d.z.re),
                num(d.z.im),
                opt(d.delta),
                num(d.ks),
                num(d.rank_bound),
                opt(d.ibp_bound),
                num(d.s_min_a),
                num(d.s_min_b),
                num(d.s_max_a),
                num(d.s_max_b),
                d.singular_flag.to_string(),
            ]
        }),
    )
}

pub fn write_disk_csv(path: &Path, rows: &[DiskRow]) -> Result<()> {
    write_csv(
        path,
        &[
            "n",
            "replicate",
            "radial_ks",
            "angular_ks",
            "top_eigen_modulus",
        ],
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.replicate.to_string(),
                opt(r.radial_ks),
                opt(r.angular_ks),
                opt(r.top_eigen_modulus),
            ]
        }),
    )
}

pub fn write_scaling_csv(path: &Path, report: &ScalingReport) -> Result<()> {
    write_csv(
        path,
        &["n", "median_abs_delta", "median_ks", "min_smin", "max_smax"],
        report.per_dim.iter().map(|s| {
            vec![
                s.n.to_string(),
                opt(s.median_abs_delta),
                opt(s.median_ks),
                opt(s.min_smin),
                opt(s.max_smax),
            ]
        }),
    )
}

pub fn write_report_files(report: &RunReport, dir: &Path) -> Result<()> {
    let json_path = dir.join("report.json");
    let mut json = serde_json::to_string_pretty(report).expect("report serializes");
    json.push('\n');
    std::fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))?;
    write_delta_csv(&dir.join("delta.csv"), &report.delta)?;
    write_disk_csv(&dir.join("disk.csv"), &report.disk)?;
    write_scaling_csv(&dir.join("scaling.csv"), &report.scaling)
}
