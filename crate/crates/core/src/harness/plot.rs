use std::fmt::Write as _;
use std::path::Path;

use super::report::ranked;
use super::runner::ExperimentResult;
use crate::error::{structural, Result};

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotStyle {
    pub width: f64,
    pub height: f64,
    /// Error-bar half-length is `error_scale * std / sqrt(runs)`.
    pub error_scale: f64,
    /// Logarithmic time axis.
    pub log_x: bool,
}

impl Default for PlotStyle {
    fn default() -> Self {
        Self {
            width: 720.0,
            height: 480.0,
            error_scale: 1.0,
            log_x: false,
        }
    }
}

/// Six significant digits, shortest form.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("float round-trips");
    rounded.to_string()
}

/// Mean regret trajectories with error bars, one polyline per policy.
pub fn render_svg(result: &ExperimentResult, style: &PlotStyle) -> Result<String> {
    if result.checkpoints.is_empty() || result.policies.iter().any(|p| p.mean_trajectory.is_empty())
    {
        return Err(structural("no trajectory recorded"));
    }
    let (ml, mr, mt, mb) = (70.0, 180.0, 20.0, 50.0);
    let (pw, ph) = (style.width - ml - mr, style.height - mt - mb);
    let root_runs = (result.runs as f64).sqrt();
    let half = |std: f64| style.error_scale * std / root_runs;

    let t_max = *result.checkpoints.last().unwrap() as f64;
    let t_min = result.checkpoints[0] as f64;
    let x_of = |t: f64| {
        let frac = if style.log_x {
            if t_max > t_min {
                (t.ln() - t_min.ln()) / (t_max.ln() - t_min.ln())
            } else {
                1.0
            }
        } else {
            t / t_max
        };
        ml + frac * pw
    };
    let y_max = result
        .policies
        .iter()
        .flat_map(|p| {
            p.mean_trajectory
                .iter()
                .zip(&p.std_trajectory)
                .map(|(m, s)| m + half(*s))
        })
        .fold(0.0f64, f64::max);
    let y_max = if y_max > 0.0 { y_max * 1.05 } else { 1.0 };
    let y_of = |v: f64| mt + ph * (1.0 - v / y_max);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="12">"#,
        sig6(style.width),
        sig6(style.height),
        sig6(style.width),
        sig6(style.height)
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        sig6(ml),
        sig6(mt),
        sig6(pw),
        sig6(ph)
    );
    for i in 0..=5 {
        let v = y_max * i as f64 / 5.0;
        let y = y_of(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="black"/><text x="{}" y="{}" text-anchor="end">{}</text>"#,
            sig6(ml - 5.0),
            sig6(ml),
            sig6(ml - 8.0),
            sig6(y + 4.0),
            sig6(v),
            y = sig6(y)
        );
    }
    let x_ticks: Vec<f64> = if style.log_x {
        (0..)
            .map(|e| 10f64.powi(e))
            .take_while(|&t| t <= t_max)
            .filter(|&t| t >= t_min)
            .collect()
    } else {
        (0..=5).map(|i| t_max * i as f64 / 5.0).collect()
    };
    for t in x_ticks {
        let x = sig6(x_of(t));
        let _ = writeln!(
            svg,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/><text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            sig6(mt + ph),
            sig6(mt + ph + 5.0),
            sig6(mt + ph + 18.0),
            sig6(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">t</text><text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">Reg(t)</text>"#,
        sig6(ml + pw / 2.0),
        sig6(style.height - 10.0),
        sig6(mt + ph / 2.0),
        sig6(mt + ph / 2.0)
    );

    for (slot, p) in ranked(result).into_iter().enumerate() {
        let color = PALETTE[slot % PALETTE.len()];
        let final_mean = *p.mean_trajectory.last().unwrap();
        let points: Vec<String> = result
            .checkpoints
            .iter()
            .zip(&p.mean_trajectory)
            .map(|(&t, &m)| format!("{},{}", sig6(x_of(t as f64)), sig6(y_of(m))))
            .collect();
        let _ = writeln!(
            svg,
            r#"<g data-policy="{}" data-final-mean="{}" stroke="{color}">"#,
            escape(&p.policy),
            sig6(final_mean)
        );
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        for ((&t, &m), &s) in result
            .checkpoints
            .iter()
            .zip(&p.mean_trajectory)
            .zip(&p.std_trajectory)
        {
            let x = sig6(x_of(t as f64));
            let _ = writeln!(
                svg,
                r#"<line class="error-bar" x1="{x}" y1="{}" x2="{x}" y2="{}"/>"#,
                sig6(y_of(m + half(s))),
                sig6(y_of(m - half(s)))
            );
        }
        let _ = writeln!(svg, "</g>");
        let ly = mt + 10.0 + 18.0 * slot as f64;
        let _ = writeln!(
            svg,
            r#"<g class="legend"><line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text></g>"#,
            sig6(ml + pw + 10.0),
            sig6(ml + pw + 30.0),
            sig6(ml + pw + 36.0),
            sig6(ly + 4.0),
            escape(&p.policy),
            ly = sig6(ly)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Renders and writes the plot to `path`.
pub fn emit_plot(
    result: &ExperimentResult,
    style: &PlotStyle,
    path: impl AsRef<Path>,
) -> Result<()> {
    std::fs::write(path, render_svg(result, style)?)?;
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
