//! CSV, JSON and SVG output for sweep reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Aggregate, SweepReport, TrialRecord, TrialTiming};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "estimator,n1,fraction,trial,seed,support_recovery,relative_l2_error,lambda,gamma,unconverged,error";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    SupportRecovery,
    RelativeL2Error,
}

impl Metric {
    fn file_stem(self) -> &'static str {
        match self {
            Metric::SupportRecovery => "support_recovery",
            Metric::RelativeL2Error => "relative_l2_error",
        }
    }

    fn title(self) -> &'static str {
        match self {
            Metric::SupportRecovery => "Support recovery",
            Metric::RelativeL2Error => "Relative l2 error",
        }
    }

    fn mean_std(self, a: &Aggregate) -> (f64, f64) {
        match self {
            Metric::SupportRecovery => (a.recovery_mean, a.recovery_std),
            Metric::RelativeL2Error => (a.error_mean, a.error_std),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn csv_row(r: &TrialRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.estimator,
        r.n1,
        r.fraction,
        r.trial,
        r.seed,
        opt(r.support_recovery),
        opt(r.relative_l2_error),
        opt(r.lambda),
        opt(r.gamma),
        r.unconverged,
        r.error.as_deref().map(quote).unwrap_or_default()
    )
}

/// One line per trial record under [`CSV_HEADER`]. Empty cells mark
/// missing values.
pub fn to_csv(report: &SweepReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.records {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    out
}

const PALETTE: [&str; 8] = [
    "#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Line chart of one metric against `n1`, one series per estimator with
/// ±1 standard deviation bars.
pub fn render_svg(report: &SweepReport, metric: Metric) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (60.0, 130.0, 30.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);

    let mut names: Vec<&str> = Vec::new();
    for a in &report.aggregates {
        if !names.contains(&a.estimator.as_str()) {
            names.push(&a.estimator);
        }
    }
    let xmax = report.aggregates.iter().map(|a| a.n1).max().unwrap_or(0).max(1) as f64;
    let ymax = report
        .aggregates
        .iter()
        .map(|a| {
            let (m, s) = metric.mean_std(a);
            m + s
        })
        .fold(1.0f64, f64::max);
    let sx = |n1: f64| left + pw * n1 / xmax;
    let sy = |v: f64| top + ph * (1.0 - v / ymax);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        left + pw / 2.0,
        metric.title()
    );
    let _ = writeln!(
        s,
        r#"<path d="M{left} {top} V{} H{}" fill="none" stroke="black"/>"#,
        top + ph,
        left + pw
    );
    for i in 0..=4 {
        let v = ymax * i as f64 / 4.0;
        let y = sy(v);
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{v:.2}</text>"##,
            left - 4.0,
            left - 6.0,
            y + 4.0
        );
    }
    let mut ticks: Vec<usize> = report.aggregates.iter().map(|a| a.n1).collect();
    ticks.sort_unstable();
    ticks.dedup();
    for t in ticks {
        let x = sx(t as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{t}</text>"#,
            top + ph,
            top + ph + 4.0,
            top + ph + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">outliers n1</text>"#,
        left + pw / 2.0,
        h - 10.0
    );

    for (i, name) in names.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts: Vec<&Aggregate> = report.aggregates.iter().filter(|a| a.estimator == *name).collect();
        pts.sort_by_key(|a| a.n1);
        let line: Vec<String> = pts
            .iter()
            .map(|a| format!("{:.2},{:.2}", sx(a.n1 as f64), sy(metric.mean_std(a).0)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line.join(" ")
        );
        for a in &pts {
            let (m, sd) = metric.mean_std(a);
            let x = sx(a.n1 as f64);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}"/><circle cx="{x:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sy((m - sd).max(0.0)),
                sy(m + sd),
                sy(m)
            );
        }
        let ly = top + 10.0 + 18.0 * i as f64;
        let lx = left + pw + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{name}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn write(path: PathBuf, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Write `report.csv`, `report.json` and one SVG per metric into `dir`,
/// creating it if needed. Returns the paths written.
pub fn emit_report(report: &SweepReport, dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for f in formats {
        match f {
            ReportFormat::Csv => write(dir.join("report.csv"), &to_csv(report), &mut written)?,
            ReportFormat::Json => {
                let mut json = serde_json::to_string_pretty(report)?;
                json.push('\n');
                write(dir.join("report.json"), &json, &mut written)?
            }
            ReportFormat::Svg => {
                for m in [Metric::SupportRecovery, Metric::RelativeL2Error] {
                    let path = dir.join(format!("{}.svg", m.file_stem()));
                    write(path, &render_svg(report, m), &mut written)?;
                }
            }
        }
    }
    Ok(written)
}

/// `timings.csv` with one wall-clock time per trial.
pub fn write_timings(timings: &[TrialTiming], dir: &Path) -> Result<PathBuf> {
    let mut s = String::from("estimator,n1,trial,wall_time_ms\n");
    for t in timings {
        let _ = writeln!(s, "{},{},{},{:.3}", t.estimator, t.n1, t.trial, t.wall_time_ms);
    }
    let path = dir.join("timings.csv");
    std::fs::write(&path, s).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
