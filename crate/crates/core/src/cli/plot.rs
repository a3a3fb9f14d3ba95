//! Minimal standalone SVG figures: histogram with a density overlay and ECDF overlays.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Draw as a step function instead of a polyline.
    pub step: bool,
}

impl Series {
    /// ECDF of `sample` as a step series.
    pub fn ecdf(label: impl Into<String>, sample: &[f64]) -> Self {
        let mut xs: Vec<f64> = sample.iter().copied().filter(|x| x.is_finite()).collect();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let points = xs.iter().enumerate().map(|(i, &x)| (x, (i + 1) as f64 / n)).collect();
        Self { label: label.into(), points, step: true }
    }

    /// `f` sampled on `count` points of `[lo, hi]`.
    pub fn curve(label: impl Into<String>, lo: f64, hi: f64, count: usize, f: impl Fn(f64) -> f64) -> Self {
        let points = (0..count)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / (count - 1) as f64;
                (x, f(x))
            })
            .collect();
        Self { label: label.into(), points, step: false }
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(title: &str, metadata: &str, frame: &Frame) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, "<metadata>{}</metadata>", escape(metadata));
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="25" font-size="15" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));
    let (x0, x1) = (frame.px(frame.x.0), frame.px(frame.x.1));
    let (y0, y1) = (frame.py(frame.y.0), frame.py(frame.y.1));
    let _ = writeln!(s, r#"<polyline points="{x0},{y1} {x0},{y0} {x1},{y0}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = frame.x.0 + t * (frame.x.1 - frame.x.0);
        let yv = frame.y.0 + t * (frame.y.1 - frame.y.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            frame.px(xv),
            y0 + 16.0,
            tick(xv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            frame.py(yv) + 4.0,
            tick(yv)
        );
    }
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn legend(s: &mut String, labels: &[&str]) {
    for (i, label) in labels.iter().enumerate() {
        let y = MARGIN + 14.0 * i as f64;
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{color}" stroke-width="2"/>"#,
            WIDTH - MARGIN - 150.0,
            WIDTH - MARGIN - 130.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
            WIDTH - MARGIN - 125.0,
            y + 4.0,
            escape(label)
        );
    }
}

fn path(frame: &Frame, series: &Series) -> String {
    let mut pts = Vec::new();
    let mut prev_y = frame.y.0.max(0.0).min(frame.y.1);
    for &(x, y) in &series.points {
        let x = x.clamp(frame.x.0, frame.x.1);
        let y = y.clamp(frame.y.0, frame.y.1);
        if series.step {
            pts.push(format!("{:.2},{:.2}", frame.px(x), frame.py(prev_y)));
        }
        pts.push(format!("{:.2},{:.2}", frame.px(x), frame.py(y)));
        prev_y = y;
    }
    pts.join(" ")
}

/// Overlaid step/line series on `[x_lo, x_hi] x [0, 1]`.
pub fn ecdf_svg(title: &str, metadata: &str, x_range: (f64, f64), series: &[Series]) -> String {
    let frame = Frame { x: x_range, y: (0.0, 1.0) };
    let mut s = open(title, metadata, &frame);
    for (i, ser) in series.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            path(&frame, ser),
            COLORS[i % COLORS.len()]
        );
    }
    legend(&mut s, &series.iter().map(|x| x.label.as_str()).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}

/// Density-normalized histogram of `sample` restricted to `x_range`, with `density` overlaid.
pub fn histogram_svg(
    title: &str,
    metadata: &str,
    sample: &[f64],
    x_range: (f64, f64),
    bins: usize,
    density: &Series,
) -> String {
    let (lo, hi) = x_range;
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in sample {
        if x >= lo && x < hi {
            counts[((x - lo) / width) as usize] += 1;
        }
    }
    let total = sample.len().max(1) as f64;
    let heights: Vec<f64> = counts.iter().map(|&c| c as f64 / (total * width)).collect();
    let top = heights.iter().chain(density.points.iter().map(|(_, y)| y)).fold(0.0f64, |m, &v| m.max(v)) * 1.05;
    let frame = Frame { x: x_range, y: (0.0, if top > 0.0 { top } else { 1.0 }) };
    let mut s = open(title, metadata, &frame);
    for (i, h) in heights.iter().enumerate() {
        let x = lo + i as f64 * width;
        let _ = writeln!(
            s,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#9ecae1" stroke="white"/>"##,
            frame.px(x),
            frame.py(*h),
            frame.px(x + width) - frame.px(x),
            frame.py(0.0) - frame.py(*h)
        );
    }
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
        path(&frame, density),
        COLORS[1]
    );
    legend(&mut s, &["sample", density.label.as_str()]);
    s.push_str("</svg>\n");
    s
}
