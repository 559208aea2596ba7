//! Deterministic SVG rendering of domains and traces.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::CircularSlitDisk;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvgOptions {
    /// Image width and height in pixels.
    pub size: u32,
    pub stroke_width: f64,
    pub trace_colors: Vec<String>,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            size: 600,
            stroke_width: 1.0,
            trace_colors: ["#c0392b", "#2471a3", "#229954", "#7d3c98", "#d68910"].map(String::from).to_vec(),
        }
    }
}

pub fn render_svg(domain: &CircularSlitDisk, traces: &[Vec<Complex64>], opts: &SvgOptions) -> String {
    let s = opts.size as f64;
    let half = s / 2.0;
    let scale = 0.47 * s;
    let px = |z: Complex64| (half + scale * z.re, half - scale * z.im);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{0}" viewBox="0 0 {0} {0}">"#,
        opts.size
    )
    .unwrap();
    writeln!(
        out,
        r#"<circle cx="{half:.3}" cy="{half:.3}" r="{scale:.3}" fill="none" stroke="black" stroke-width="{:.3}"/>"#,
        2.0 * opts.stroke_width
    )
    .unwrap();
    for slit in domain.slits() {
        // With y flipped, counterclockwise in the plane is sweep flag 0.
        let (x0, y0) = px(slit.start_tip());
        let (x1, y1) = px(slit.end_tip());
        let large = u8::from(slit.arc_length > std::f64::consts::PI);
        writeln!(
            out,
            r#"<path d="M {x0:.3} {y0:.3} A {r:.3} {r:.3} 0 {large} 0 {x1:.3} {y1:.3}" fill="none" stroke="black" stroke-width="{w:.3}"/>"#,
            r = scale * slit.m,
            w = 2.0 * opts.stroke_width
        )
        .unwrap();
    }
    for (k, trace) in traces.iter().enumerate() {
        let color = opts.trace_colors.get(k % opts.trace_colors.len().max(1)).map(String::as_str).unwrap_or("black");
        let mut points = String::new();
        for (i, &z) in trace.iter().enumerate() {
            let (x, y) = px(z);
            if i > 0 {
                points.push(' ');
            }
            write!(points, "{x:.3},{y:.3}").unwrap();
        }
        writeln!(
            out,
            r#"<polyline points="{points}" fill="none" stroke="{color}" stroke-width="{:.3}"/>"#,
            opts.stroke_width
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_domain;

    #[test]
    fn empty_trace_list_draws_circle_and_slits() {
        let d = make_domain(&[(0.5, 0.0, 1.5), (0.8, 2.0, 3.5)]).unwrap();
        let svg = render_svg(&d, &[], &SvgOptions::default());
        assert_eq!(svg.matches("<circle").count(), 1);
        assert_eq!(svg.matches("<path").count(), 2);
        assert!(!svg.contains("<polyline"));
    }

    #[test]
    fn output_is_repeatable_and_one_polyline_per_trace() {
        let d = CircularSlitDisk::disk();
        let t: Vec<Complex64> = (0..1000).map(|k| Complex64::from_polar(1.0 - k as f64 / 1200.0, k as f64 * 0.01)).collect();
        let a = render_svg(&d, std::slice::from_ref(&t), &SvgOptions::default());
        assert_eq!(a, render_svg(&d, &[t], &SvgOptions::default()));
        assert_eq!(a.matches("<polyline").count(), 1);
        let pts = a.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(pts.split(' ').count(), 1000);
    }
}
