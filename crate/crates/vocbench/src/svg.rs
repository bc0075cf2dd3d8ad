//! Deterministic SVG rendering of VOC curves.
//!
//! Curves are piecewise affine, so each one is drawn as a polyline through
//! its exact knots — no sampling, no resolution parameter. The output is a
//! pure function of the input curves: identical inputs produce
//! byte-identical documents.

use crate::error::{Error, Result};
use crate::voc::VocCurve;

/// Fixed series palette; series take colors in order, cycling when there
/// are more curves than entries.
pub const PALETTE: [&str; 6] = [
    "#1b6ca8", "#c0392b", "#1e8449", "#8e44ad", "#d68910", "#17807e",
];

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 50.0;
const TICKS: usize = 5;

/// Escapes text for use in SVG content and attribute values.
fn escape_xml(s: &str) -> String {
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

/// Pixel coordinates: fixed two-decimal form keeps the document compact and
/// byte-stable.
fn coord(v: f64) -> String {
    format!("{:.2}", v + 0.0)
}

/// Tick labels: rounded to three decimals, shortest decimal form.
fn tick_label(v: f64) -> String {
    let rounded = (v * 1000.0).round() / 1000.0 + 0.0;
    format!("{rounded}")
}

/// The (ω, value) vertices of one curve over `[0, omega_max]`: the left
/// edge, every knot inside the window, and the right edge.
fn vertices(curve: &VocCurve, omega_max: f64) -> Result<Vec<(f64, f64)>> {
    let mut points = vec![(0.0, curve.evaluate(0.0)?)];
    for piece in curve.pieces() {
        let start = piece.omega_start();
        if start > 0.0 && start <= omega_max {
            points.push((start, curve.evaluate(start)?));
        }
    }
    if points.last().map(|&(w, _)| w) != Some(omega_max) {
        points.push((omega_max, curve.evaluate(omega_max)?));
    }
    Ok(points)
}

/// Renders labeled VOC curves over `ω ∈ [0, omega_max]` as a standalone SVG
/// document.
pub fn voc_svg(series: &[(&str, &VocCurve)], omega_max: f64) -> Result<String> {
    if series.is_empty() {
        return Err(Error::field("series", "at least one curve is required"));
    }
    if !omega_max.is_finite() || omega_max <= 0.0 {
        return Err(Error::field(
            "omega_max",
            format!("must be finite and positive, got {omega_max}"),
        ));
    }

    let all_vertices: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|(_, curve)| vertices(curve, omega_max))
        .collect::<Result<_>>()?;

    // Value range across every series, always including zero so the
    // baseline is visible.
    let mut y_min: f64 = 0.0;
    let mut y_max: f64 = 0.0;
    for points in &all_vertices {
        for &(_, v) in points {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
    }
    let span = if y_max > y_min { y_max - y_min } else { 1.0 };
    let y_lo = y_min - 0.05 * span;
    let y_hi = y_max + 0.05 * span;

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_px = |omega: f64| MARGIN_LEFT + omega / omega_max * plot_w;
    let y_px = |value: f64| MARGIN_TOP + (y_hi - value) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n");

    // Gridlines and tick labels.
    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let omega = f * omega_max;
        let gx = x_px(omega);
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{y1}\" x2=\"{x}\" y2=\"{y2}\" stroke=\"#e0e0e0\"/>\n",
            x = coord(gx),
            y1 = coord(MARGIN_TOP),
            y2 = coord(MARGIN_TOP + plot_h),
        ));
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"middle\" fill=\"#333333\">{label}</text>\n",
            x = coord(gx),
            y = coord(MARGIN_TOP + plot_h + 18.0),
            label = tick_label(omega),
        ));

        let value = y_lo + f * (y_hi - y_lo);
        let gy = y_px(value);
        svg.push_str(&format!(
            "<line x1=\"{x1}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\" stroke=\"#e0e0e0\"/>\n",
            x1 = coord(MARGIN_LEFT),
            x2 = coord(MARGIN_LEFT + plot_w),
            y = coord(gy),
        ));
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"end\" fill=\"#333333\">{label}</text>\n",
            x = coord(MARGIN_LEFT - 8.0),
            y = coord(gy + 4.0),
            label = tick_label(value),
        ));
    }

    // Zero-value baseline, when it lies inside the plotted range.
    if y_lo < 0.0 && y_hi > 0.0 {
        svg.push_str(&format!(
            "<line x1=\"{x1}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\" stroke=\"#999999\" \
             stroke-dasharray=\"4 3\"/>\n",
            x1 = coord(MARGIN_LEFT),
            x2 = coord(MARGIN_LEFT + plot_w),
            y = coord(y_px(0.0)),
        ));
    }

    // Plot frame.
    svg.push_str(&format!(
        "<rect x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" fill=\"none\" \
         stroke=\"#333333\"/>\n",
        x = coord(MARGIN_LEFT),
        y = coord(MARGIN_TOP),
        w = coord(plot_w),
        h = coord(plot_h),
    ));

    // Axis titles.
    svg.push_str(&format!(
        "<text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\" fill=\"#333333\">omega (penalty)</text>\n",
        x = coord(MARGIN_LEFT + plot_w / 2.0),
        y = coord(HEIGHT - 12.0),
    ));
    svg.push_str(&format!(
        "<text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\" fill=\"#333333\" \
         transform=\"rotate(-90 {x} {y})\">dimensionless value</text>\n",
        x = coord(18.0),
        y = coord(MARGIN_TOP + plot_h / 2.0),
    ));

    // Curves.
    for (i, points) in all_vertices.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = points
            .iter()
            .map(|&(w, v)| format!("{},{}", coord(x_px(w)), coord(y_px(v))))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{points}\" fill=\"none\" stroke=\"{color}\" \
             stroke-width=\"2\"/>\n",
            points = path.join(" "),
        ));
    }

    // Legend, top-right inside the frame.
    for (i, (label, _)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let ly = MARGIN_TOP + 16.0 + 18.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{x1}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\" stroke=\"{color}\" \
             stroke-width=\"2\"/>\n",
            x1 = coord(MARGIN_LEFT + plot_w - 150.0),
            x2 = coord(MARGIN_LEFT + plot_w - 122.0),
            y = coord(ly),
        ));
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"12\" \
             fill=\"#333333\">{label}</text>\n",
            x = coord(MARGIN_LEFT + plot_w - 116.0),
            y = coord(ly + 4.0),
            label = escape_xml(label),
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voc::omega_aware_voc;

    fn d1_curve() -> VocCurve {
        omega_aware_voc(&crate::model::tests::d1())
    }

    #[test]
    fn renders_one_polyline_per_series() {
        let a = d1_curve();
        let b = d1_curve();
        let svg = voc_svg(&[("first", &a), ("second", &b)], 10.0).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.starts_with("<svg "));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains(PALETTE[0]));
        assert!(svg.contains(PALETTE[1]));
    }

    #[test]
    fn output_is_deterministic() {
        let curve = d1_curve();
        let a = voc_svg(&[("d1", &curve)], 10.0).unwrap();
        let b = voc_svg(&[("d1", &curve)], 10.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn labels_are_escaped() {
        let curve = d1_curve();
        let svg = voc_svg(&[("a<b & \"c\"", &curve)], 5.0).unwrap();
        assert!(svg.contains("a&lt;b &amp; &quot;c&quot;"));
        assert!(!svg.contains("a<b"));
    }

    #[test]
    fn polyline_passes_through_every_knot() {
        let curve = d1_curve();
        let points = vertices(&curve, 10.0).unwrap();
        // d1: knots at 0 and 1, plus the right edge.
        assert_eq!(points.len(), 3);
        assert_eq!(points[0], (0.0, 0.6));
        assert_eq!(points[1], (1.0, 0.4));
        assert_eq!(points[2], (10.0, 0.4));
    }

    #[test]
    fn window_smaller_than_last_knot_truncates() {
        let curve = d1_curve();
        let points = vertices(&curve, 0.5).unwrap();
        assert_eq!(points.len(), 2);
        assert_eq!(points[0].0, 0.0);
        assert_eq!(points[1].0, 0.5);
    }

    #[test]
    fn rejects_bad_window_and_empty_series() {
        let curve = d1_curve();
        assert!(voc_svg(&[("d1", &curve)], 0.0).is_err());
        assert!(voc_svg(&[("d1", &curve)], f64::NAN).is_err());
        assert!(voc_svg(&[("d1", &curve)], -1.0).is_err());
        assert!(voc_svg(&[], 10.0).is_err());
    }

    #[test]
    fn tick_labels_are_short_decimals() {
        assert_eq!(tick_label(0.0), "0");
        assert_eq!(tick_label(2.0), "2");
        assert_eq!(tick_label(0.6000000000000001), "0.6");
        assert_eq!(tick_label(-0.0000001), "0");
        assert_eq!(tick_label(1.0 / 3.0), "0.333");
    }
}
