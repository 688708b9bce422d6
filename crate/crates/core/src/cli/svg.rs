//! Minimal deterministic SVG plots: fixed number formatting, no timestamps.

use std::fmt::Write as _;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const MARGIN: f64 = 48.0;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1.0);
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn fmt(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" { "0.00".into() } else { s }
}

fn label(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-2 && v.abs() < 1e4) {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".into() } else { s.to_string() }
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Axis-aligned panel mapping data coordinates into a pixel box.
struct Panel {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Panel {
    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let px = self.x0 + (x - self.xr.0) / (self.xr.1 - self.xr.0) * self.w;
        let py = self.y0 + self.h - (y - self.yr.0) / (self.yr.1 - self.yr.0) * self.h;
        (px, py)
    }

    fn frame(&self, out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
        let (x0, y0, w, h) = (self.x0, self.y0, self.w, self.h);
        let _ = writeln!(
            out,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#444" stroke-width="1"/>"##,
            fmt(x0),
            fmt(y0),
            fmt(w),
            fmt(h)
        );
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#, fmt(x0 + w / 2.0), fmt(y0 - 8.0), escape(title));
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" font-size="11">{}</text>"#, fmt(x0 + w / 2.0), fmt(y0 + h + 32.0), escape(xlabel));
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="11" transform="rotate(-90 {} {})">{}</text>"#,
            fmt(x0 - 34.0),
            fmt(y0 + h / 2.0),
            fmt(x0 - 34.0),
            fmt(y0 + h / 2.0),
            escape(ylabel)
        );
        for (v, anchor) in [(self.xr.0, "start"), (self.xr.1, "end")] {
            let (px, _) = self.map(v, self.yr.0);
            let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="{anchor}" font-size="10">{}</text>"#, fmt(px), fmt(y0 + h + 14.0), label(v));
        }
        for v in [self.yr.0, self.yr.1] {
            let (_, py) = self.map(self.xr.0, v);
            let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end" font-size="10">{}</text>"#, fmt(x0 - 4.0), fmt(py + 3.0), label(v));
        }
    }

    fn polyline(&self, out: &mut String, points: &[(f64, f64)], color: &str, dashed: bool) {
        let coords: Vec<String> = points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| {
                let (px, py) = self.map(x, y);
                format!("{},{}", fmt(px), fmt(py))
            })
            .collect();
        let dash = if dashed { r#" stroke-dasharray="5,3""# } else { "" };
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
            coords.join(" ")
        );
    }
}

fn open(width: f64, height: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif">"#,
        fmt(width),
        fmt(height),
        fmt(width),
        fmt(height)
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    s
}

fn legend(out: &mut String, x: f64, y: f64, labels: &[(String, &str, bool)]) {
    for (i, (text, color, dashed)) in labels.iter().enumerate() {
        let ly = y + 14.0 * i as f64;
        let dash = if *dashed { r#" stroke-dasharray="5,3""# } else { "" };
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            fmt(x),
            fmt(ly),
            fmt(x + 16.0),
            fmt(ly)
        );
        let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="10">{}</text>"#, fmt(x + 20.0), fmt(ly + 3.0), escape(text));
    }
}

/// One panel, one polyline per series.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series], width: f64, height: f64) -> String {
    let xr = extent(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let yr = extent(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let legend_w = 110.0;
    let panel = Panel {
        x0: MARGIN + 10.0,
        y0: MARGIN,
        w: (width - 2.0 * MARGIN - legend_w).max(40.0),
        h: (height - 2.0 * MARGIN - 10.0).max(40.0),
        xr,
        yr,
    };
    let mut out = open(width, height);
    panel.frame(&mut out, title, xlabel, ylabel);
    let mut labels = Vec::new();
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        panel.polyline(&mut out, &s.points, color, false);
        labels.push((s.label.clone(), color, false));
    }
    legend(&mut out, panel.x0 + panel.w + 12.0, panel.y0 + 6.0, &labels);
    out.push_str("</svg>\n");
    out
}

pub struct Curve {
    pub label: String,
    pub points: Vec<[f64; 3]>,
    pub dashed: bool,
}

/// Three orthographic views (x–y, x–z, y–z) with equal axis scaling inside
/// each view.
pub fn orthographic_views(title: &str, curves: &[Curve], width: f64, height: f64) -> String {
    let views = [(0, 1, "top (x–y)"), (0, 2, "front (x–z)"), (1, 2, "side (y–z)")];
    let gap = 40.0;
    let side = ((width - 2.0 * MARGIN - 2.0 * gap) / 3.0).min(height - 2.0 * MARGIN - 40.0).max(40.0);
    let axis = ["x (mm)", "y (mm)", "z (mm)"];
    let mut out = open(width, height);
    let _ = writeln!(out, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, fmt(width / 2.0), escape(title));
    for (k, (a, b, name)) in views.iter().enumerate() {
        let xr = extent(curves.iter().flat_map(|c| c.points.iter().map(|p| p[*a])));
        let yr = extent(curves.iter().flat_map(|c| c.points.iter().map(|p| p[*b])));
        let span = (xr.1 - xr.0).max(yr.1 - yr.0);
        let cx = 0.5 * (xr.0 + xr.1);
        let cy = 0.5 * (yr.0 + yr.1);
        let panel = Panel {
            x0: MARGIN + k as f64 * (side + gap),
            y0: MARGIN,
            w: side,
            h: side,
            xr: (cx - 0.55 * span, cx + 0.55 * span),
            yr: (cy - 0.55 * span, cy + 0.55 * span),
        };
        panel.frame(&mut out, name, axis[*a], axis[*b]);
        for (i, c) in curves.iter().enumerate() {
            let pts: Vec<(f64, f64)> = c.points.iter().map(|p| (p[*a], p[*b])).collect();
            panel.polyline(&mut out, &pts, PALETTE[i % PALETTE.len()], c.dashed);
        }
    }
    let labels: Vec<(String, &str, bool)> =
        curves.iter().enumerate().map(|(i, c)| (c.label.clone(), PALETTE[i % PALETTE.len()], c.dashed)).collect();
    legend(&mut out, MARGIN, MARGIN + side + 50.0, &labels);
    out.push_str("</svg>\n");
    out
}
