//! CSV and SVG emission of plot series.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::format_float;
use crate::diagnostics::{PlotKind, PlotSeries};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `x,y` header followed by one line per point.
pub fn format_plot_csv<T: Scalar>(series: &PlotSeries<T>) -> String {
    let mut out = String::from("x,y\n");
    for &(x, y) in &series.points {
        let _ = writeln!(out, "{},{}", format_float(x), format_float(y));
    }
    out
}

pub fn write_plot_csv<T: Scalar>(series: &PlotSeries<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_plot_csv(series))?;
    Ok(())
}

/// Points of a plot CSV.
pub fn parse_plot_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "x,y")) => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "expected header x,y".into(),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let bad = || Error::Parse {
                line: i + 1,
                message: format!("expected two numbers, found {l:?}"),
            };
            let (x, y) = l.split_once(',').ok_or_else(bad)?;
            Ok((x.parse().map_err(|_| bad())?, y.parse().map_err(|_| bad())?))
        })
        .collect()
}

/// Layout of an SVG scatter plot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvgPlot {
    pub width: u32,
    pub height: u32,
    pub margin: u32,
    /// Axis ranges; derived from the series kind and data when `None`.
    pub x_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    pub point_radius: f64,
    pub title: Option<String>,
    pub x_label: Option<String>,
    pub y_label: Option<String>,
}

impl Default for SvgPlot {
    fn default() -> Self {
        Self {
            width: 480,
            height: 480,
            margin: 60,
            x_range: None,
            y_range: None,
            point_radius: 2.0,
            title: None,
            x_label: None,
            y_label: None,
        }
    }
}

fn default_labels(kind: PlotKind) -> (&'static str, &'static str, &'static str) {
    match kind {
        PlotKind::Mhealy => (
            "MHealy plot",
            "Nominal value n/N",
            "Chi-square cumulative probability",
        ),
        PlotKind::HealyType => (
            "Healy-type plot",
            "Nominal value n/N",
            "Chi-square cumulative probability",
        ),
        PlotKind::Dd => ("DD plot", "Matrix-based MSD", "Vector-based MSD"),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn auto_range<T: Scalar>(series: &PlotSeries<T>) -> (f64, f64) {
    match series.kind {
        PlotKind::Mhealy | PlotKind::HealyType => (0.0, 1.0),
        PlotKind::Dd => {
            let hi = series
                .points
                .iter()
                .fold(0.0f64, |m, &(x, y)| m.max(x.as_f64()).max(y.as_f64()));
            (0.0, if hi > 0.0 { hi * 1.05 } else { 1.0 })
        }
    }
}

/// Self-contained SVG 1.1 document: axes with five ticks each, the `y = x`
/// reference line in red, and one circle per point.
pub fn render_plot_svg<T: Scalar>(series: &PlotSeries<T>, style: &SvgPlot) -> String {
    let (title, xl, yl) = default_labels(series.kind);
    let title = style.title.as_deref().unwrap_or(title);
    let xl = style.x_label.as_deref().unwrap_or(xl);
    let yl = style.y_label.as_deref().unwrap_or(yl);
    let (x0, x1) = style.x_range.unwrap_or_else(|| auto_range(series));
    let (y0, y1) = style.y_range.unwrap_or_else(|| auto_range(series));
    let (w, h, m) = (style.width as f64, style.height as f64, style.margin as f64);
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        style.width, style.height, style.width, style.height
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{}" height="{}" style="fill:#ffffff"/>"#, style.width, style.height);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" style="font-family:sans-serif;font-size:16px;text-anchor:middle">{}</text>"#,
        w / 2.0,
        m / 2.0,
        escape(title)
    );
    // Axes.
    let _ = writeln!(
        s,
        r#"<path d="M {:.2} {:.2} L {:.2} {:.2} L {:.2} {:.2}" style="fill:none;stroke:#000000;stroke-width:1"/>"#,
        px(x0),
        py(y1),
        px(x0),
        py(y0),
        px(x1),
        py(y0)
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" style="stroke:#000000;stroke-width:1"/>"#,
            px(xv),
            py(y0),
            px(xv),
            py(y0) + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" style="font-family:sans-serif;font-size:11px;text-anchor:middle">{}</text>"#,
            px(xv),
            py(y0) + 18.0,
            tick_label(xv)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" style="stroke:#000000;stroke-width:1"/>"#,
            px(x0) - 5.0,
            py(yv),
            px(x0),
            py(yv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" style="font-family:sans-serif;font-size:11px;text-anchor:end">{}</text>"#,
            px(x0) - 8.0,
            py(yv) + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" style="font-family:sans-serif;font-size:13px;text-anchor:middle">{}</text>"#,
        w / 2.0,
        h - m / 4.0,
        escape(xl)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" transform="rotate(-90 {:.2} {:.2})" style="font-family:sans-serif;font-size:13px;text-anchor:middle">{}</text>"#,
        m / 4.0 + 4.0,
        h / 2.0,
        m / 4.0 + 4.0,
        h / 2.0,
        escape(yl)
    );
    // Reference line y = x over the part of it inside both ranges.
    let lo = x0.max(y0);
    let hi = x1.min(y1);
    if hi > lo {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" style="stroke:#d62728;stroke-width:1.5"/>"#,
            px(lo),
            py(lo),
            px(hi),
            py(hi)
        );
    }
    let _ = writeln!(s, r#"<g style="fill:#1f77b4;stroke:none">"#);
    for &(x, y) in &series.points {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{}"/>"#,
            px(x.as_f64()),
            py(y.as_f64()),
            style.point_radius
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        let t = format!("{v:.2}");
        let t = t.trim_end_matches('0').trim_end_matches('.');
        if t == "-0" { "0".to_string() } else { t.to_string() }
    }
}

pub fn write_plot_svg<T: Scalar>(series: &PlotSeries<T>, style: &SvgPlot, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_plot_svg(series, style))?;
    Ok(())
}
