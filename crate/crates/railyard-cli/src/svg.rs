//! Static plot of a traced frozen boundary in the (χ, κ) plane.

use std::fmt::Write;

use railyard_core::asymptotics::Segment;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 56.0;

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

/// Draws the segments inside `chi_range × kappa_range` with labelled axes.
pub fn boundary(segments: &[Segment], points: &[(f64, f64)], chi_range: (f64, f64), kappa_range: (f64, f64)) -> String {
    let (x0, x1) = chi_range;
    let (y0, y1) = kappa_range;
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#).unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    let (l, r, t, b) = (px(x0), px(x1), py(y1), py(y0));
    writeln!(s, r#"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#, r - l, b - t)
        .unwrap();
    for x in ticks(x0, x1) {
        let xp = px(x);
        writeln!(s, r#"<line x1="{xp:.2}" y1="{b:.2}" x2="{xp:.2}" y2="{:.2}" stroke="black"/>"#, b + 5.0).unwrap();
        writeln!(s, r#"<text x="{xp:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#, b + 18.0, fmt_tick(x))
            .unwrap();
    }
    for y in ticks(y0, y1) {
        let yp = py(y);
        writeln!(s, r#"<line x1="{:.2}" y1="{yp:.2}" x2="{l:.2}" y2="{yp:.2}" stroke="black"/>"#, l - 5.0).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#, l - 8.0, yp + 4.0, fmt_tick(y))
            .unwrap();
    }
    writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">χ</text>"#, (l + r) / 2.0, H - 12.0).unwrap();
    writeln!(s, r#"<text x="16" y="{:.2}" font-size="14" text-anchor="middle">κ</text>"#, (t + b) / 2.0).unwrap();
    writeln!(s, r##"<g stroke="#1f4e9c" stroke-width="1.2" fill="none">"##).unwrap();
    for &((a, c), (d, e)) in segments {
        writeln!(s, r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#, px(a), py(c), px(d), py(e)).unwrap();
    }
    writeln!(s, "</g>").unwrap();
    writeln!(s, r##"<g fill="#1f4e9c">"##).unwrap();
    for &(x, y) in points {
        writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="0.8"/>"#, px(x), py(y)).unwrap();
    }
    writeln!(s, "</g>\n</svg>").unwrap();
    s
}

fn fmt_tick(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_marks() {
        assert_eq!(ticks(0.0, 1.0), vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]);
        assert_eq!(fmt_tick(0.6000000000000001), "0.6");
        assert_eq!(fmt_tick(-0.0), "0");
    }

    #[test]
    fn labelled_axes() {
        let svg = boundary(&[((0.2, 0.0), (0.3, 0.1))], &[], (0.0, 1.0), (-1.0, 1.0));
        assert!(svg.contains(">χ</text>") && svg.contains(">κ</text>"));
        assert_eq!(svg.matches("<line").count(), 1 + ticks(0.0, 1.0).len() + ticks(-1.0, 1.0).len());
    }
}
