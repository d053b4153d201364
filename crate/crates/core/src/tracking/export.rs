//! SVG overlay of aggregated learning curves: one mean line and one min-max
//! band per curve.

use std::fmt::Write;

use super::aggregate::AggregatedCurve;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders `metric` (a point metric such as `test_macro_f1`) against labeled
/// count. Legend entries use `label` of each pair.
pub fn render_overlay_svg(curves: &[(String, AggregatedCurve)], metric: &str) -> String {
    let xs = curves.iter().flat_map(|(_, c)| c.points.iter().map(|p| p.labeled_count as f64));
    let (x_min, x_max) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    let (x_min, x_max) = if x_min.is_finite() && x_max > x_min { (x_min, x_max) } else { (0.0, x_max.max(1.0)) };
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| MARGIN_TOP + (1.0 - y.clamp(0.0, 1.0)) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let y = sy(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"##,
            MARGIN_LEFT + plot_w,
            MARGIN_LEFT - 6.0,
            y + 4.0
        );
    }
    for i in 0..=4 {
        let v = x_min + (x_max - x_min) * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{:.0}</text>"#,
            sx(v),
            MARGIN_TOP + plot_h + 18.0,
            v
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">labeled documents</text><text x="14" y="{:.2}" transform="rotate(-90 14 {:.2})" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 10.0,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(metric)
    );

    for (i, (label, curve)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let stats: Vec<_> = curve
            .points
            .iter()
            .filter_map(|p| p.metric(metric).map(|s| (p.labeled_count as f64, s)))
            .collect();
        let upper = stats.iter().map(|(x, s)| format!("{:.2},{:.2}", sx(*x), sy(s.max)));
        let lower = stats.iter().rev().map(|(x, s)| format!("{:.2},{:.2}", sx(*x), sy(s.min)));
        let band: Vec<String> = upper.chain(lower).collect();
        let mean: Vec<String> = stats.iter().map(|(x, s)| format!("{:.2},{:.2}", sx(*x), sy(s.mean))).collect();
        let name = escape(label);
        let _ = writeln!(
            svg,
            r#"<g class="curve" data-teacher="{name}"><polygon class="band" points="{}" fill="{color}" fill-opacity="0.18" stroke="none"/><polyline class="mean" points="{}" fill="none" stroke="{color}" stroke-width="2"/></g>"#,
            band.join(" "),
            mean.join(" ")
        );
        let ly = MARGIN_TOP + 16.0 * i as f64;
        let lx = WIDTH - MARGIN_RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{name}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::fixtures::curve;
    use crate::tracking::aggregate_seed_runs;

    #[test]
    fn one_group_per_curve_with_labels() {
        let r = aggregate_seed_runs("random", &[curve(1, &[(5, 0.2), (15, 0.5)]), curve(2, &[(5, 0.3), (15, 0.6)])]).unwrap();
        let m = aggregate_seed_runs("margin", &[curve(1, &[(5, 0.2), (15, 0.7)])]).unwrap();
        let svg = render_overlay_svg(&[("random".into(), r), ("margin<1>".into(), m)], "test_macro_f1");
        assert_eq!(svg.matches(r#"class="mean""#).count(), 2);
        assert_eq!(svg.matches(r#"class="band""#).count(), 2);
        assert!(svg.contains(r#"data-teacher="random""#));
        assert!(svg.contains("margin&lt;1&gt;"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
