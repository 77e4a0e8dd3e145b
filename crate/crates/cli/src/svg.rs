//! Minimal deterministic SVG figures. Coordinates are printed with two
//! decimals so identical inputs give identical bytes.

use std::fmt::Write;

const W: f64 = 480.0;
const H: f64 = 360.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Data range padded by 5%; `[0, 1]` when empty, a unit window when flat.
fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo > hi {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

struct Frame {
    out: String,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(title: &str, xlabel: &str, ylabel: &str, x: (f64, f64), y: (f64, f64)) -> Self {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(out, r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="13">{}</text>"#, W / 2.0, escape(title));
        let (x0, y0, x1, y1) = (LEFT, H - BOTTOM, W - RIGHT, TOP);
        let _ = writeln!(out, r#"<path d="M{x0:.2} {y1:.2} V{y0:.2} H{x1:.2}" fill="none" stroke="black"/>"#);
        let mut f = Self { out, x, y };
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = x.0 + t * (x.1 - x.0);
            let yv = y.0 + t * (y.1 - y.0);
            let (px, py) = (f.px(xv), f.py(yv));
            let _ = writeln!(f.out, r#"<path d="M{px:.2} {y0:.2} v4" stroke="black"/>"#);
            let _ = writeln!(f.out, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{xv:.3}</text>"#, y0 + 16.0);
            let _ = writeln!(f.out, r#"<path d="M{x0:.2} {py:.2} h-4" stroke="black"/>"#);
            let _ = writeln!(f.out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.3}</text>"#, x0 - 6.0, py + 4.0);
        }
        let _ = writeln!(f.out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 12.0, escape(xlabel));
        let _ = writeln!(
            f.out,
            r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(ylabel)
        );
        f
    }

    fn px(&self, v: f64) -> f64 {
        LEFT + (v - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        H - BOTTOM - (v - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

/// Least-squares `(slope, intercept)`; `None` without x variance.
fn fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let b = sxy / sxx;
    Some((b, my - b * mx))
}

/// Scatter plot with the least-squares line.
pub fn scatter(title: &str, xlabel: &str, ylabel: &str, points: &[(f64, f64)]) -> String {
    let x = range(points.iter().map(|p| p.0));
    let y = range(points.iter().map(|p| p.1));
    let mut f = Frame::new(title, xlabel, ylabel, x, y);
    if let Some((b, a)) = fit(points) {
        let (x0, x1) = (x.0, x.1);
        let (ya, yb) = (a + b * x0, a + b * x1);
        let _ = writeln!(
            f.out,
            r##"<path d="M{:.2} {:.2} L{:.2} {:.2}" stroke="#c0392b" stroke-dasharray="4 3"/>"##,
            f.px(x0),
            f.py(ya.clamp(y.0, y.1)),
            f.px(x1),
            f.py(yb.clamp(y.0, y.1))
        );
    }
    for &(px, py) in points {
        let _ = writeln!(f.out, r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#2c6fbb"/>"##, f.px(px), f.py(py));
    }
    f.finish()
}

/// Line with markers, points in the given order.
pub fn line(title: &str, xlabel: &str, ylabel: &str, points: &[(f64, f64)]) -> String {
    let x = range(points.iter().map(|p| p.0));
    let y = range(points.iter().map(|p| p.1));
    let mut f = Frame::new(title, xlabel, ylabel, x, y);
    if !points.is_empty() {
        let d: Vec<String> = points.iter().map(|&(a, b)| format!("{:.2} {:.2}", f.px(a), f.py(b))).collect();
        let _ = writeln!(f.out, r##"<path d="M{}" fill="none" stroke="#2c6fbb"/>"##, d.join(" L"));
        for &(a, b) in points {
            let _ = writeln!(f.out, r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#2c6fbb"/>"##, f.px(a), f.py(b));
        }
    }
    f.finish()
}

/// Gaussian-kernel violin of `values` on the vertical axis over `[lo, hi]`,
/// with a tick at the median.
pub fn violin(title: &str, ylabel: &str, values: &[f64], lo: f64, hi: f64) -> String {
    let mut f = Frame::new(title, "", ylabel, (0.0, 1.0), (lo, hi));
    if values.is_empty() {
        return f.finish();
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
    let bw = (1.06 * sd * n.powf(-0.2)).max(1e-3 * (hi - lo));
    const STEPS: usize = 80;
    let grid: Vec<f64> = (0..=STEPS).map(|i| lo + (hi - lo) * i as f64 / STEPS as f64).collect();
    let dens: Vec<f64> = grid
        .iter()
        .map(|&g| values.iter().map(|&v| (-0.5 * ((g - v) / bw).powi(2)).exp()).sum::<f64>())
        .collect();
    let peak = dens.iter().cloned().fold(0.0, f64::max);
    let half = |d: f64| 0.4 * d / peak;
    let right: Vec<String> = grid.iter().zip(&dens).map(|(&g, &d)| format!("{:.2} {:.2}", f.px(0.5 + half(d)), f.py(g))).collect();
    let left: Vec<String> = grid
        .iter()
        .zip(&dens)
        .rev()
        .map(|(&g, &d)| format!("{:.2} {:.2}", f.px(0.5 - half(d)), f.py(g)))
        .collect();
    let _ = writeln!(
        f.out,
        r##"<path d="M{} L{} Z" fill="#9fc5e8" stroke="#2c6fbb"/>"##,
        right.join(" L"),
        left.join(" L")
    );
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let median = if m % 2 == 1 { sorted[m / 2] } else { 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]) };
    let _ = writeln!(
        f.out,
        r#"<path d="M{:.2} {:.2} H{:.2}" stroke="black" stroke-width="2"/>"#,
        f.px(0.35),
        f.py(median),
        f.px(0.65)
    );
    f.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_figures_have_axes() {
        for s in [scatter("t", "x", "y", &[]), line("t", "x", "y", &[]), violin("t", "r", &[], -1.0, 1.0)] {
            assert!(s.starts_with("<svg"));
            assert!(s.ends_with("</svg>\n"));
            assert!(s.contains("<path d=\"M60.00 40.00 V310.00 H460.00\""));
            assert!(!s.contains("<circle"));
        }
    }

    #[test]
    fn fit_recovers_a_line() {
        let (b, a) = fit(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap();
        assert_eq!((b, a), (2.0, 1.0));
        assert!(fit(&[(1.0, 0.0), (1.0, 2.0)]).is_none());
    }

    #[test]
    fn escapes_labels() {
        assert!(scatter("a<b & c", "x", "y", &[]).contains("a&lt;b &amp; c"));
    }
}
