//! Minimal deterministic SVG line plots for experiment artifacts.
//!
//! Everything about the output is a pure function of the inputs — fixed
//! canvas, fixed palette, fixed number formatting — so re-running a
//! command reproduces the file byte for byte.

use crate::error::{Error, Result};
use std::path::Path;

/// One plotted line: a label for the legend and its `[x, y]` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<[f64; 2]>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 48.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn data_bounds(series: &[Series]) -> Result<([f64; 2], [f64; 2])> {
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for s in series {
        for p in &s.points {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(Error::NonFinite(format!(
                    "plot point in series {:?}",
                    s.label
                )));
            }
            for a in 0..2 {
                min[a] = min[a].min(p[a]);
                max[a] = max[a].max(p[a]);
            }
        }
    }
    // Pad degenerate ranges so a constant series still renders.
    for a in 0..2 {
        if max[a] - min[a] < 1e-12 {
            min[a] -= 0.5;
            max[a] += 0.5;
        }
    }
    Ok((min, max))
}

/// Renders a line plot as an SVG document string.
pub fn line_plot(title: &str, series: &[Series]) -> Result<String> {
    if series.is_empty() || series.iter().any(|s| s.points.is_empty()) {
        return Err(Error::InvalidArgument(
            "plot needs at least one series with at least one point".into(),
        ));
    }
    let (min, max) = data_bounds(series)?;
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - min[0]) / (max[0] - min[0]) * plot_w;
    let sy = |y: f64| MARGIN_TOP + plot_h - (y - min[1]) / (max[1] - min[1]) * plot_h;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"monospace\" font-size=\"12\">\n"
    ));
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    ));
    // Axes.
    out.push_str(&format!(
        "<rect x=\"{MARGIN_LEFT:.2}\" y=\"{MARGIN_TOP:.2}\" width=\"{plot_w:.2}\" \
         height=\"{plot_h:.2}\" fill=\"none\" stroke=\"#333333\"/>\n"
    ));
    // Ticks: five per axis, value labels at fixed precision.
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = min[0] + f * (max[0] - min[0]);
        let yv = min[1] + f * (max[1] - min[1]);
        let x = sx(xv);
        let y = sy(yv);
        out.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#333333\"/>\n",
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 5.0
        ));
        out.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_TOP + plot_h + 20.0,
            tick_label(xv)
        ));
        out.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{MARGIN_LEFT:.2}\" y2=\"{y:.2}\" \
             stroke=\"#333333\"/>\n",
            MARGIN_LEFT - 5.0
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT - 9.0,
            y + 4.0,
            tick_label(yv)
        ));
    }
    // Series lines and legend.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", sx(p[0]), sy(p[1])))
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            coords.join(" ")
        ));
        let ly = MARGIN_TOP + 16.0 * i as f64 + 12.0;
        let lx = WIDTH - MARGIN_RIGHT - 150.0;
        out.push_str(&format!(
            "<line x1=\"{lx:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" \
             stroke-width=\"1.5\"/>\n",
            ly - 4.0,
            lx + 22.0,
            ly - 4.0
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{ly:.2}\">{}</text>\n",
            lx + 28.0,
            escape(&s.label)
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Writes [`line_plot`] output to a file.
pub fn write_line_plot(path: impl AsRef<Path>, title: &str, series: &[Series]) -> Result<()> {
    let path = path.as_ref();
    let svg = line_plot(title, series)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path.display().to_string(), e))
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
