//! Minimal standalone SVG charts for curve reports.
//!
//! Step charts draw one horizontal `<line class="seg">` per threshold
//! interval; segments whose interval lies entirely below the majority
//! threshold 0.5 are dashed, as are the parametric sub-curves there.
//! Everything beyond that convention is cosmetic.

use crate::error::{CliError, Result};
use crate::formats::ParsedReport;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 2] = ["#3a6ea5", "#c0662f"];

fn x_px(v: f64) -> f64 {
    MARGIN + v.clamp(0.0, 1.0) * (WIDTH - 2.0 * MARGIN)
}

fn y_px(v: f64) -> f64 {
    HEIGHT - MARGIN - v.clamp(0.0, 1.0) * (HEIGHT - 2.0 * MARGIN)
}

fn header(x_label: &str, y_label: &str) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<rect x=\"{m}\" y=\"{m}\" width=\"{w}\" height=\"{h}\" fill=\"none\" \
         stroke=\"#444\" stroke-width=\"1\"/>\n",
        m = MARGIN,
        w = WIDTH - 2.0 * MARGIN,
        h = HEIGHT - 2.0 * MARGIN
    ));
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\" \
             fill=\"#444\">{tick}</text>\n",
            x_px(tick),
            HEIGHT - MARGIN + 16.0
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\" \
             fill=\"#444\">{tick}</text>\n",
            MARGIN - 6.0,
            y_px(tick) + 4.0
        ));
    }
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" \
         fill=\"#111\">{x_label}</text>\n",
        WIDTH / 2.0,
        HEIGHT - 14.0
    ));
    s.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" fill=\"#111\" \
         transform=\"rotate(-90 16 {mid:.1})\">{y_label}</text>\n",
        HEIGHT / 2.0,
        mid = HEIGHT / 2.0
    ));
    s
}

fn require_column<'a>(report: &'a ParsedReport, name: &str) -> Result<&'a [f64]> {
    report.column(name).ok_or_else(|| {
        CliError::usage(format!(
            "metric {name:?} not in report (columns: {})",
            report.names.join(", ")
        ))
    })
}

/// Metric value as a step function of the threshold.
pub fn step_plot(
    first: &ParsedReport,
    second: Option<&ParsedReport>,
    metric: &str,
) -> Result<String> {
    let mut svg = header("threshold", metric);
    let reports: Vec<&ParsedReport> = std::iter::once(first).chain(second).collect();
    for (which, report) in reports.iter().enumerate() {
        let col = require_column(report, metric)?;
        let color = COLORS[which % COLORS.len()];
        for (r, &value) in col.iter().enumerate() {
            let hi = report.thresholds[r];
            let lo = report.thresholds.get(r + 1).copied().unwrap_or(0.0);
            let dash = if hi <= 0.5 {
                " stroke-dasharray=\"6 4\""
            } else {
                ""
            };
            svg.push_str(&format!(
                "<line class=\"seg\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" \
                 stroke=\"{color}\" stroke-width=\"2\"{dash}/>\n",
                x_px(lo),
                y_px(value),
                x_px(hi),
                y_px(value)
            ));
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// One metric against another, parametrised by the threshold; the part of
/// the curve below threshold 0.5 is dashed and the majority operating point
/// is marked.
pub fn pair_plot(
    first: &ParsedReport,
    second: Option<&ParsedReport>,
    x_metric: &str,
    y_metric: &str,
) -> Result<String> {
    let mut svg = header(x_metric, y_metric);
    let reports: Vec<&ParsedReport> = std::iter::once(first).chain(second).collect();
    for (which, report) in reports.iter().enumerate() {
        let xs = require_column(report, x_metric)?;
        let ys = require_column(report, y_metric)?;
        let color = COLORS[which % COLORS.len()];
        let split = report
            .thresholds
            .iter()
            .position(|&t| t <= 0.5)
            .unwrap_or(report.thresholds.len());
        let points = |range: std::ops::Range<usize>| -> String {
            range
                .map(|r| format!("{:.2},{:.2}", x_px(xs[r]), y_px(ys[r])))
                .collect::<Vec<_>>()
                .join(" ")
        };
        // include the boundary point in both halves so the curve connects
        if split > 0 {
            svg.push_str(&format!(
                "<polyline class=\"curve\" points=\"{}\" fill=\"none\" stroke=\"{color}\" \
                 stroke-width=\"2\"/>\n",
                points(0..split)
            ));
        }
        if split < report.thresholds.len() {
            let from = split.saturating_sub(1);
            svg.push_str(&format!(
                "<polyline class=\"curve\" points=\"{}\" fill=\"none\" stroke=\"{color}\" \
                 stroke-width=\"2\" stroke-dasharray=\"6 4\"/>\n",
                points(from..report.thresholds.len())
            ));
        }
        // majority operating point: the last interval whose upper edge
        // exceeds 0.5
        let majority = split.saturating_sub(1);
        svg.push_str(&format!(
            "<circle class=\"majority\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{color}\"/>\n",
            x_px(xs[majority]),
            y_px(ys[majority])
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
