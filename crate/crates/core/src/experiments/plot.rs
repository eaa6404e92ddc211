//! Minimal SVG line and box plots.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }
    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

fn header(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>
"#,
        (W - RIGHT + LEFT) / 2.0,
        escape(title),
        (W - RIGHT + LEFT) / 2.0,
        H - 10.0,
        escape(x_label),
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
}

fn axes(out: &mut String, f: &Frame, x_ticks: bool) {
    let _ = writeln!(
        out,
        r#"<line x1="{LEFT}" y1="{}" x2="{}" y2="{}" stroke="black"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>"#,
        H - BOTTOM,
        W - RIGHT,
        H - BOTTOM,
        H - BOTTOM
    );
    for i in 0..=4 {
        let y = f.y.0 + (f.y.1 - f.y.0) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{:.3}</text>"#,
            LEFT - 5.0,
            f.py(y) + 4.0,
            y
        );
        if x_ticks {
            let x = f.x.0 + (f.x.1 - f.x.0) * i as f64 / 4.0;
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{}" text-anchor="middle">{:.3}</text>"#,
                f.px(x),
                H - BOTTOM + 16.0,
                x
            );
        }
    }
}

pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let f = Frame {
        x: range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0))),
        y: range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1))),
    };
    let mut out = String::new();
    header(&mut out, title, x_label, y_label);
    axes(&mut out, &f, true);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.join(" "));
        for &(x, y) in &s.points {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, f.px(x), f.py(y));
        }
        let ly = TOP + 18.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="12" height="12" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
            W - RIGHT + 10.0,
            ly,
            W - RIGHT + 28.0,
            ly + 10.0,
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Five-number summary `[min, q1, median, q3, max]`.
pub type FiveNumbers = [f64; 5];

/// One group of boxes (e.g. a feature) with one box per class.
pub struct BoxGroup {
    pub name: String,
    pub boxes: Vec<(String, FiveNumbers)>,
}

pub fn box_plot(title: &str, y_label: &str, groups: &[BoxGroup]) -> String {
    let f = Frame {
        x: (0.0, groups.len().max(1) as f64),
        y: range(groups.iter().flat_map(|g| g.boxes.iter().flat_map(|b| b.1))),
    };
    let mut out = String::new();
    header(&mut out, title, "", y_label);
    axes(&mut out, &f, false);
    let mut legend = Vec::new();
    for (gi, g) in groups.iter().enumerate() {
        let k = g.boxes.len().max(1) as f64;
        let slot = (f.px(1.0) - f.px(0.0)) / (k + 1.0);
        for (bi, (class, v)) in g.boxes.iter().enumerate() {
            if !legend.contains(class) {
                legend.push(class.clone());
            }
            let color = PALETTE[legend.iter().position(|c| c == class).unwrap_or(0) % PALETTE.len()];
            let cx = f.px(gi as f64) + slot * (bi as f64 + 1.0);
            let half = slot * 0.35;
            let _ = writeln!(
                out,
                r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="{color}"/><rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="{color}"/><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
                f.py(v[0]),
                f.py(v[4]),
                cx - half,
                f.py(v[3]),
                2.0 * half,
                (f.py(v[1]) - f.py(v[3])).max(0.5),
                cx - half,
                f.py(v[2]),
                cx + half,
                f.py(v[2])
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" text-anchor="middle" font-size="10">{}</text>"#,
            f.px(gi as f64 + 0.5),
            H - BOTTOM + 16.0,
            escape(&g.name)
        );
    }
    for (i, class) in legend.iter().enumerate() {
        let ly = TOP + 18.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            W - RIGHT + 10.0,
            ly,
            PALETTE[i % PALETTE.len()],
            W - RIGHT + 28.0,
            ly + 10.0,
            escape(class)
        );
    }
    out.push_str("</svg>\n");
    out
}
