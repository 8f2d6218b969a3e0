//! Minimal SVG log-log plots for rate sweeps.

use quasirand::verify::RateReport;
use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Per-seed values as dots, means joined by a line, one color per metric.
pub fn sweep_svg(reports: &[RateReport]) -> String {
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .flat_map(|r| r.rows.iter().map(|row| (row.n as f64, row.value)))
        .filter(|&(_, y)| y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let (x0, x1) = bounds(pts.iter().map(|p| p.0));
    let (y0, y1) = bounds(pts.iter().map(|p| p.1));
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">ln n</text>"#, W / 2.0, H - 16.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-size="13" transform="rotate(-90 16 {})" text-anchor="middle">ln value</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (idx, r) in reports.iter().enumerate() {
        let color = COLORS[idx % COLORS.len()];
        for row in r.rows.iter().filter(|row| row.value > 0.0 && row.value.is_finite()) {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}" fill-opacity="0.5"/>"#,
                sx((row.n as f64).ln()),
                sy(row.value.ln())
            );
        }
        let line: Vec<String> = r
            .sizes
            .iter()
            .zip(&r.means)
            .filter(|(_, m)| **m > 0.0)
            .map(|(&n, &m)| format!("{:.2},{:.2}", sx((n as f64).ln()), sy(m.ln())))
            .collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, line.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{} slope {:.3} (target {})</text>"#,
            PAD + 8.0,
            PAD + 16.0 * (idx as f64 + 1.0),
            r.metric.name(),
            r.slope,
            r.target
        );
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let m = 0.05 * (hi - lo);
        (lo - m, hi + m)
    }
}
