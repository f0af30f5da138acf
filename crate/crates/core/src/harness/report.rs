//! CSV and SVG output.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::HarnessError;

/// One line of a report; field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub problem: String,
    pub n: u64,
    pub k: usize,
    pub p: String,
    pub mode: String,
    pub trials: u64,
    pub seed: u64,
    pub mean_queries: f64,
    pub ci95: f64,
    pub success_rate: f64,
    #[serde(rename = "thm1_lo")]
    pub rand_lo: f64,
    #[serde(rename = "thm1_hi")]
    pub rand_hi: f64,
    #[serde(rename = "thm2_lo")]
    pub det_lo: f64,
    #[serde(rename = "thm2_hi")]
    pub det_hi: f64,
    #[serde(rename = "thm3")]
    pub ordered_rand: f64,
    #[serde(rename = "thm4")]
    pub ordered_det: f64,
    #[serde(rename = "thm5")]
    pub sort_floor: f64,
    pub pass: bool,
    /// Largest single-run query count; not part of the CSV.
    #[serde(skip)]
    pub max_queries: u64,
    /// Human-readable reason when `pass` is false.
    #[serde(skip)]
    pub note: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundReport {
    pub rows: Vec<ReportRow>,
}

impl BoundReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Svg,
}

pub fn to_csv(report: &BoundReport) -> Result<String, HarnessError> {
    if report.rows.is_empty() {
        return Err(HarnessError::EmptyReport);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &report.rows {
        w.serialize(row).map_err(|e| HarnessError::IoFailure(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::IoFailure(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Line chart against `p`: both bands as line pairs, measurements as dots.
pub fn to_svg(report: &BoundReport) -> Result<String, HarnessError> {
    if report.rows.is_empty() {
        return Err(HarnessError::EmptyReport);
    }
    let xs: Vec<f64> = report.rows.iter().map(|r| parse_fraction(&r.p)).collect();
    let series: [(&str, &str, fn(&ReportRow) -> f64); 4] = [
        ("rand_lo", "#c0392b", |r| r.rand_lo),
        ("rand_hi", "#c0392b", |r| r.rand_hi),
        ("det_lo", "#2471a3", |r| r.det_lo),
        ("det_hi", "#2471a3", |r| r.det_hi),
    ];
    let measured = report.rows.iter().any(|r| r.mode != "formula");
    let mut ys: Vec<f64> = report.rows.iter().flat_map(|r| series.iter().map(move |s| (s.2)(r))).collect();
    if measured {
        ys.extend(report.rows.iter().map(|r| r.mean_queries));
    }
    let (x_lo, x_hi) = span(&xs);
    let (y_lo, y_hi) = span(&ys);
    let sx = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{MARGIN} {top} V{bottom} H{right}" stroke="black" fill="none"/>"#,
        top = MARGIN,
        bottom = HEIGHT - MARGIN,
        right = WIDTH - MARGIN
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="12">p</text>"#, WIDTH / 2.0, HEIGHT - 15.0);
    let _ = writeln!(svg, r#"<text x="5" y="{}" font-size="12">{y_hi:.1}</text>"#, MARGIN);
    let _ = writeln!(svg, r#"<text x="5" y="{}" font-size="12">{y_lo:.1}</text>"#, HEIGHT - MARGIN);
    for (name, colour, f) in series {
        let points: Vec<String> = report.rows.iter().zip(&xs).map(|(r, &x)| format!("{:.2},{:.2}", sx(x), sy(f(r)))).collect();
        let dash = if name.ends_with("lo") { r#" stroke-dasharray="4 3""# } else { "" };
        let _ = writeln!(svg, r#"<polyline id="{name}" points="{}" stroke="{colour}" fill="none"{dash}/>"#, points.join(" "));
    }
    if measured {
        for (r, &x) in report.rows.iter().zip(&xs) {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="black"/>"#, sx(x), sy(r.mean_queries));
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn parse_fraction(s: &str) -> f64 {
    crate::math::parse_rational(s).map_or(0.0, |r| crate::math::to_f64(&r))
}

fn span(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 1.0, lo + 1.0)
    }
}

/// Writes `report` to `path` in the given format.
pub fn emit_report(report: &BoundReport, format: Format, path: &Path) -> Result<(), HarnessError> {
    let text = match format {
        Format::Csv => to_csv(report)?,
        Format::Svg => to_svg(report)?,
    };
    let mut f = std::fs::File::create(path).map_err(|e| HarnessError::IoFailure(format!("{}: {e}", path.display())))?;
    f.write_all(text.as_bytes()).map_err(|e| HarnessError::IoFailure(format!("{}: {e}", path.display())))
}

pub const CSV_HEADER: &str =
    "problem,n,k,p,mode,trials,seed,mean_queries,ci95,success_rate,thm1_lo,thm1_hi,thm2_lo,thm2_hi,thm3,thm4,thm5,pass";
