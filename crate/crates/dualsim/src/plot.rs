//! Minimal SVG line charts.

use std::fmt::Write;

use dualsim_core::Trajectory;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

/// One polyline.
pub struct Line<'a> {
    /// Legend label.
    pub label: &'a str,
    /// Stroke colour.
    pub color: &'a str,
    /// x values.
    pub x: &'a [f64],
    /// y values.
    pub y: &'a [f64],
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Render `lines` on shared axes.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, lines: &[Line<'_>]) -> String {
    let finite = |v: &&f64| v.is_finite();
    let xs = lines.iter().flat_map(|l| l.x.iter()).filter(finite);
    let (x_min, x_max) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let ys = lines.iter().flat_map(|l| l.y.iter()).filter(finite);
    let (mut y_min, mut y_max) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (x_min, x_max) = if x_min < x_max { (x_min, x_max) } else { (0.0, 1.0) };
    y_min = y_min.min(0.0);
    if !y_max.is_finite() || y_max <= y_min {
        y_max = y_min + 1.0;
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * pw;
    let sy = |y: f64| TOP + ph - (y - y_min) / (y_max - y_min) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let xv = x_min + f * (x_max - x_min);
        let yv = y_min + f * (y_max - y_min);
        let (x, y) = (sx(xv), sy(yv));
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 20.0,
            tick_label(xv)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );
    for (i, line) in lines.iter().enumerate() {
        let points: Vec<String> = line
            .x
            .iter()
            .zip(line.y)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            line.color,
            points.join(" ")
        );
        let ly = TOP + 15.0 + 16.0 * i as f64;
        let lx = LEFT + pw - 130.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            line.color,
            lx + 26.0,
            ly + 4.0,
            escape(line.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// One chart per species with the ODE and the ensemble mean overlaid.
/// Returns `(species name, svg)` pairs.
pub fn comparison_charts(scenario: &str, ode: &Trajectory, mean: &Trajectory) -> Vec<(String, String)> {
    ode.species
        .iter()
        .enumerate()
        .map(|(s, id)| {
            let mut lines = vec![Line { label: "ODE", color: "#1f77b4", x: &ode.times, y: &ode.columns[s] }];
            if let Some(k) = mean.species_index(id) {
                lines.push(Line { label: "ABM mean", color: "#d62728", x: &mean.times, y: &mean.columns[k] });
            }
            let title = format!("{scenario}: {}", id.name());
            (id.name().to_string(), line_chart(&title, "time (days)", id.name(), &lines))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_has_one_polyline_per_line() {
        let x = [0.0, 1.0, 2.0];
        let svg = line_chart(
            "T & E",
            "days",
            "cells",
            &[
                Line { label: "ODE", color: "blue", x: &x, y: &[1.0, 2.0, 3.0] },
                Line { label: "ABM", color: "red", x: &x, y: &[1.0, 1.5, f64::NAN] },
            ],
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("T &amp; E"));
    }

    #[test]
    fn flat_zero_series_still_renders() {
        let x = [0.0, 1.0];
        let svg = line_chart("zero", "days", "cells", &[Line { label: "ODE", color: "blue", x: &x, y: &[0.0, 0.0] }]);
        assert!(!svg.contains("NaN"));
    }
}
