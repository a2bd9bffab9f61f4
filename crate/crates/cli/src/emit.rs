//! Output writers. Every byte here must be a pure function of the result
//! table, so floats get fixed-format rendering and wall time is reported
//! as a constant placeholder rather than a measurement.

use crate::config::{Evaluator, ExperimentSpec};
use crate::runner::{ResultRow, ResultTable};
use std::fmt::Write as _;
use std::io;
use std::path::Path;

pub const CSV_HEADER: [&str; 8] = [
    "sweep_value",
    "mode",
    "evaluator",
    "mean",
    "ci95_half_width",
    "trials",
    "wall_time_s",
    "status",
];

/// The mode cell; a secondary-parameter label rides along as
/// "mode@label" so curves stay distinguishable in the flat schema.
fn mode_cell(row: &ResultRow) -> String {
    match &row.series_label {
        Some(label) => format!("{}@{}", row.mode.label(), label),
        None => row.mode.label().to_string(),
    }
}

fn number_cell(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.9e}"),
        None => String::new(),
    }
}

pub fn render_csv(table: &ResultTable) -> Result<String, io::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for row in &table.rows {
        w.write_record([
            format!("{}", row.sweep_value),
            mode_cell(row),
            row.evaluator.label().to_string(),
            number_cell(row.mean),
            number_cell(row.ci95_half_width),
            row.trials.to_string(),
            // Honest timing would break byte determinism, which the
            // harness promises; the column stays for schema stability.
            "0.000".to_string(),
            row.status.clone(),
        ])?;
    }
    let bytes = w.into_inner().map_err(io::Error::other)?;
    String::from_utf8(bytes).map_err(io::Error::other)
}

pub fn emit_csv(table: &ResultTable, path: &Path) -> Result<(), io::Error> {
    std::fs::write(path, render_csv(table)?)
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

struct Series<'a> {
    name: String,
    evaluator: Evaluator,
    points: Vec<(f64, f64)>,
    color: &'a str,
}

const PALETTE: [&str; 6] = [
    "#1b6ca8", "#c0392b", "#1e8449", "#8e44ad", "#b7950b", "#34495e",
];

const VIEW_W: f64 = 860.0;
const VIEW_H: f64 = 540.0;
const PLOT_X0: f64 = 90.0;
const PLOT_X1: f64 = 820.0;
const PLOT_Y0: f64 = 40.0;
const PLOT_Y1: f64 = 460.0;

fn fmt_coord(v: f64) -> String {
    format!("{v:.2}")
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let mag = v.abs();
    if (1e-3..1e4).contains(&mag) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// One polyline per (mode, evaluator, series-label) triple. Analytic
/// curves are solid, Monte Carlo dashed with point markers; colors key
/// the (mode, label) pair so the two engines for one curve share a hue.
pub fn render_svg(spec: &ExperimentSpec, table: &ResultTable) -> String {
    let mut series: Vec<Series> = Vec::new();
    for row in &table.rows {
        if !row.is_ok() {
            continue;
        }
        let Some(mean) = row.mean else { continue };
        let name = match &row.series_label {
            Some(l) => format!("{} {}", row.mode.label(), l),
            None => row.mode.label().to_string(),
        };
        let slot = series
            .iter()
            .position(|s| s.name == name && s.evaluator == row.evaluator);
        let idx = match slot {
            Some(i) => i,
            None => {
                // Both engines for one curve share a hue.
                let color = match series.iter().find(|s| s.name == name) {
                    Some(prior) => prior.color,
                    None => {
                        let mut names: Vec<&str> = Vec::new();
                        for s in &series {
                            if !names.contains(&s.name.as_str()) {
                                names.push(&s.name);
                            }
                        }
                        PALETTE[names.len() % PALETTE.len()]
                    }
                };
                series.push(Series {
                    name: name.clone(),
                    evaluator: row.evaluator,
                    points: Vec::new(),
                    color,
                });
                series.len() - 1
            }
        };
        series[idx].points.push((row.sweep_value, mean));
    }

    let xs: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0))
        .collect();
    let ys: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .collect();
    let (x_min, x_max) = span(&xs);
    let (y_min, y_max) = span_padded(&ys);
    let sx = move |x: f64| PLOT_X0 + (x - x_min) / (x_max - x_min) * (PLOT_X1 - PLOT_X0);
    let sy = move |y: f64| PLOT_Y1 - (y - y_min) / (y_max - y_min) * (PLOT_Y1 - PLOT_Y0);

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {VIEW_W} {VIEW_H}\" \
         font-family=\"sans-serif\" font-size=\"13\">\n"
    );
    let _ = write!(
        svg,
        "<rect x=\"0\" y=\"0\" width=\"{VIEW_W}\" height=\"{VIEW_H}\" fill=\"white\"/>\n"
    );
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        (PLOT_X0 + PLOT_X1) / 2.0,
        xml_escape(&spec.experiment_id)
    );

    // Grid and ticks: five stops per axis.
    for i in 0..=4 {
        let fx = x_min + (x_max - x_min) * i as f64 / 4.0;
        let px = sx(fx);
        let _ = write!(
            svg,
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#dddddd\"/>\n",
            fmt_coord(px),
            fmt_coord(PLOT_Y0),
            fmt_coord(PLOT_Y1)
        );
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            fmt_coord(px),
            fmt_coord(PLOT_Y1 + 20.0),
            fmt_tick(fx)
        );
        let fy = y_min + (y_max - y_min) * i as f64 / 4.0;
        let py = sy(fy);
        let _ = write!(
            svg,
            "<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"#dddddd\"/>\n",
            fmt_coord(PLOT_X0),
            fmt_coord(PLOT_X1),
            fmt_coord(py)
        );
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            fmt_coord(PLOT_X0 - 8.0),
            fmt_coord(py + 4.0),
            fmt_tick(fy)
        );
    }
    let _ = write!(
        svg,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444444\"/>\n",
        fmt_coord(PLOT_X0),
        fmt_coord(PLOT_Y0),
        fmt_coord(PLOT_X1 - PLOT_X0),
        fmt_coord(PLOT_Y1 - PLOT_Y0)
    );

    // Axis labels.
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        (PLOT_X0 + PLOT_X1) / 2.0,
        VIEW_H - 14.0,
        xml_escape(spec.swept_parameter.name())
    );
    let _ = write!(
        svg,
        "<text x=\"22\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 22 {})\">ergodic rate (nats/s/Hz)</text>\n",
        (PLOT_Y0 + PLOT_Y1) / 2.0,
        (PLOT_Y0 + PLOT_Y1) / 2.0
    );

    for s in &series {
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{},{}", fmt_coord(sx(x)), fmt_coord(sy(y))))
            .collect();
        let dash = match s.evaluator {
            Evaluator::Analytic => "",
            Evaluator::MonteCarlo => " stroke-dasharray=\"6 4\"",
        };
        let _ = write!(
            svg,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{} points=\"{}\"/>\n",
            s.color,
            dash,
            pts.join(" ")
        );
        if s.evaluator == Evaluator::MonteCarlo {
            for &(x, y) in &s.points {
                let _ = write!(
                    svg,
                    "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"/>\n",
                    fmt_coord(sx(x)),
                    fmt_coord(sy(y)),
                    s.color
                );
            }
        }
    }

    // Legend, top-right inside the plot.
    for (i, s) in series.iter().enumerate() {
        let ly = PLOT_Y0 + 16.0 + 18.0 * i as f64;
        let dash = match s.evaluator {
            Evaluator::Analytic => "",
            Evaluator::MonteCarlo => " stroke-dasharray=\"6 4\"",
        };
        let _ = write!(
            svg,
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"{4}/>\n",
            fmt_coord(PLOT_X1 - 240.0),
            fmt_coord(ly - 4.0),
            fmt_coord(PLOT_X1 - 210.0),
            s.color,
            dash
        );
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\">{}</text>\n",
            fmt_coord(PLOT_X1 - 202.0),
            fmt_coord(ly),
            xml_escape(&format!("{} ({})", s.name, s.evaluator.label()))
        );
    }

    svg.push_str("</svg>\n");
    svg
}

fn span(vals: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn span_padded(vals: &[f64]) -> (f64, f64) {
    let (lo, hi) = span(vals);
    let pad = (hi - lo) * 0.05;
    // Rates are nonnegative; anchor at zero unless the data dips below.
    let floor = if lo >= 0.0 { 0.0 } else { lo - pad };
    (floor, hi + pad)
}

pub fn emit_svg(spec: &ExperimentSpec, table: &ResultTable, path: &Path) -> Result<(), io::Error> {
    std::fs::write(path, render_svg(spec, table))
}
