use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::sweep::{Curve, ExperimentResults};
use crate::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 180.0, 40.0, 50.0); // left, right, top, bottom
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Writes, per experiment, the summary/curve/pair CSVs and one SVG each for
/// train and test loss against step. Everything is rendered before the first
/// file is written, so invalid input leaves the directory untouched.
pub fn emit_plots(results: &[ExperimentResults], dir: &Path) -> Result<Vec<PathBuf>> {
    if results.is_empty() {
        return Err(Error::InvalidParameter("no results to plot".into()));
    }
    if let Some(r) = results.iter().find(|r| r.curves.is_empty()) {
        return Err(Error::InvalidParameter(format!("experiment {} has no curves", r.name)));
    }
    let mut files: Vec<(String, String)> = Vec::new();
    for r in results {
        if !r.summary.is_empty() {
            files.push((format!("{}_summary.csv", r.name), rows_csv(&r.summary)?));
        }
        files.push((format!("{}_curves.csv", r.name), curves_csv(&r.curves)));
        if !r.pairs.is_empty() {
            files.push((format!("{}_pairs.csv", r.name), rows_csv(&r.pairs)?));
        }
        files.push((format!("{}_train.svg", r.name), svg_plot(&format!("{} train loss", r.name), &r.curves, |c| &c.train)));
        files.push((format!("{}_test.svg", r.name), svg_plot(&format!("{} test loss", r.name), &r.curves, |c| &c.test)));
    }
    fs::create_dir_all(dir)?;
    files
        .into_iter()
        .map(|(name, body)| {
            let path = dir.join(name);
            fs::write(&path, body)?;
            Ok(path)
        })
        .collect()
}

pub fn rows_csv<T: serde::Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn curves_csv(curves: &[Curve]) -> String {
    let mut out = String::from("label,step,train_loss,test_loss,frob_norm_sq\n");
    for c in curves {
        for i in 0..c.steps.len() {
            let _ = writeln!(out, "{},{},{},{},{}", c.label, c.steps[i], c.train[i], c.test[i], c.frob_sq[i]);
        }
    }
    out
}

/// Line plot of `series(curve)` against step, one polyline per curve. The
/// y axis is logarithmic when every value is positive.
pub fn svg_plot(title: &str, curves: &[Curve], series: impl Fn(&Curve) -> &[f64]) -> String {
    let values: Vec<f64> = curves.iter().flat_map(|c| series(c).iter().cloned()).filter(|v| v.is_finite()).collect();
    let log = !values.is_empty() && values.iter().all(|v| *v > 0.0);
    let tr = |v: f64| if log { v.log10() } else { v };
    let (mut y_lo, mut y_hi) =
        values.iter().map(|v| tr(*v)).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !(y_lo < y_hi) {
        y_lo = if y_lo.is_finite() { y_lo - 1.0 } else { 0.0 };
        y_hi = y_lo + 2.0;
    }
    let x_hi = curves.iter().flat_map(|c| c.steps.last().cloned()).max().unwrap_or(1).max(1) as f64;
    let (left, right, top, bottom) = MARGIN;
    let (pw, ph) = (WIDTH - left - right, HEIGHT - top - bottom);
    let px = |step: f64| left + pw * step / x_hi;
    let py = |v: f64| top + ph * (1.0 - (tr(v) - y_lo) / (y_hi - y_lo));

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="22" font-size="14">{}</text>"#, left, escape(title));
    let _ = writeln!(svg, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let yv = y_lo + f * (y_hi - y_lo);
        let label = if log { 10f64.powf(yv) } else { yv };
        let y = top + ph * (1.0 - f);
        let _ = writeln!(svg, r#"<text x="{}" y="{:.1}" text-anchor="end">{:.3e}</text>"#, left - 6.0, y + 4.0, label);
        let x = left + pw * f;
        let _ = writeln!(svg, r#"<text x="{x:.1}" y="{}" text-anchor="middle">{:.0}</text>"#, top + ph + 18.0, f * x_hi);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">step</text>"#, left + pw / 2.0, HEIGHT - 10.0);
    for (k, c) in curves.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = c
            .steps
            .iter()
            .zip(series(c))
            .filter(|(_, v)| v.is_finite())
            .map(|(s, v)| format!("{:.2},{:.2}", px(*s as f64), py(*v)))
            .collect();
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, points.join(" "));
        let ly = top + 14.0 + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{0}" y1="{ly}" x2="{1}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            left + pw + 10.0,
            left + pw + 30.0
        );
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, left + pw + 34.0, ly + 4.0, escape(&c.label));
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
