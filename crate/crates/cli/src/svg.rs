//! Static SVG charts. Coordinates are printed with two decimals so output is
//! byte-stable.

use std::fmt::Write;

use featrend_core::metrics::Quartiles;

const W: f64 = 900.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 130.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Canvas {
    out: String,
}

impl Canvas {
    fn new(title: &str) -> Self {
        let mut out = String::new();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
        )
        .unwrap();
        writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
        writeln!(out, r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title)).unwrap();
        Canvas { out }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, style: &str) {
        writeln!(self.out, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" {style}/>"#).unwrap();
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, body: &str) {
        writeln!(self.out, r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#, escape(body)).unwrap();
    }

    /// Label under a category slot, rotated to fit long feature names.
    fn category(&mut self, x: f64, body: &str) {
        let y = H - BOTTOM + 12.0;
        writeln!(
            self.out,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="end" transform="rotate(-60 {x:.2} {y:.2})">{}</text>"#,
            escape(body)
        )
        .unwrap();
    }

    fn axes(&mut self, y_label: &str, ticks: &[(f64, String)]) {
        let style = r#"stroke="black""#;
        self.line(LEFT, TOP, LEFT, H - BOTTOM, style);
        self.line(LEFT, H - BOTTOM, W - RIGHT, H - BOTTOM, style);
        for (y, label) in ticks {
            self.line(LEFT - 4.0, *y, LEFT, *y, style);
            self.line(LEFT, *y, W - RIGHT, *y, r##"stroke="#dddddd""##);
            self.text(LEFT - 6.0, y + 4.0, "end", label);
        }
        let mid = (TOP + H - BOTTOM) / 2.0;
        writeln!(
            self.out,
            r#"<text x="16" y="{mid:.2}" text-anchor="middle" transform="rotate(-90 16 {mid:.2})">{}</text>"#,
            escape(y_label)
        )
        .unwrap();
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

/// Maps data values onto the plot's vertical extent.
#[derive(Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Scale {
    fn linear(lo: f64, hi: f64) -> Self {
        let hi = if hi > lo { hi } else { lo + 1.0 };
        Scale { lo, hi, log: false }
    }

    fn y(&self, v: f64) -> f64 {
        let (v, lo, hi) = if self.log { (v.log10(), self.lo.log10(), self.hi.log10()) } else { (v, self.lo, self.hi) };
        let frac = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
        H - BOTTOM - frac * (H - BOTTOM - TOP)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.log10().floor() as i32, self.hi.log10().ceil() as i32);
            (a..=b).map(|e| (self.y(10f64.powi(e)), format!("1e{e}"))).collect()
        } else {
            (0..=5)
                .map(|i| {
                    let v = self.lo + (self.hi - self.lo) * i as f64 / 5.0;
                    (self.y(v), short(v))
                })
                .collect()
        }
    }
}

fn short(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn slot(i: usize, n: usize) -> (f64, f64) {
    let width = (W - LEFT - RIGHT) / n.max(1) as f64;
    (LEFT + width * (i as f64 + 0.5), width)
}

/// One bar per item: (category, value, text printed on top of the bar).
pub fn bar_chart(title: &str, y_label: &str, max: f64, bars: &[(String, f64, String)]) -> String {
    let mut c = Canvas::new(title);
    let scale = Scale::linear(0.0, max);
    c.axes(y_label, &scale.ticks());
    for (i, (name, value, note)) in bars.iter().enumerate() {
        let (x, width) = slot(i, bars.len());
        let top = scale.y(*value);
        writeln!(
            c.out,
            r##"<rect x="{:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="#4c72b0"/>"##,
            x - width * 0.35,
            width * 0.7,
            H - BOTTOM - top
        )
        .unwrap();
        c.text(x, top - 3.0, "middle", note);
        c.category(x, name);
    }
    c.finish()
}

/// Box-and-whisker per category; whiskers span min to max. `log` plots
/// positive values on a log axis (categories without any are left empty).
pub fn box_plot(title: &str, y_label: &str, log: bool, boxes: &[(String, Option<Quartiles>)]) -> String {
    let mut c = Canvas::new(title);
    let present: Vec<&Quartiles> = boxes.iter().filter_map(|(_, q)| q.as_ref()).collect();
    let scale = if log {
        let lo = present.iter().map(|q| q.min).filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
        let hi = present.iter().map(|q| q.max).fold(0.0, f64::max);
        if lo.is_finite() && hi > 0.0 {
            let lo = 10f64.powf(lo.log10().floor());
            let hi = 10f64.powf(hi.log10().ceil()).max(lo * 10.0);
            Scale { lo, hi, log: true }
        } else {
            Scale::linear(0.0, 1.0)
        }
    } else {
        Scale::linear(0.0, present.iter().map(|q| q.max).fold(0.0, f64::max))
    };
    c.axes(y_label, &scale.ticks());
    for (i, (name, q)) in boxes.iter().enumerate() {
        let (x, width) = slot(i, boxes.len());
        c.category(x, name);
        let Some(q) = q else { continue };
        if scale.log && q.max <= 0.0 {
            continue;
        }
        let half = width * 0.3;
        let stroke = r#"stroke="black""#;
        c.line(x, scale.y(q.min), x, scale.y(q.q1), stroke);
        c.line(x, scale.y(q.q3), x, scale.y(q.max), stroke);
        c.line(x - half / 2.0, scale.y(q.min), x + half / 2.0, scale.y(q.min), stroke);
        c.line(x - half / 2.0, scale.y(q.max), x + half / 2.0, scale.y(q.max), stroke);
        let (top, bottom) = (scale.y(q.q3), scale.y(q.q1));
        writeln!(
            c.out,
            r##"<rect x="{:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="#dd8452" stroke="black"/>"##,
            x - half,
            2.0 * half,
            (bottom - top).max(0.5)
        )
        .unwrap();
        c.line(x - half, scale.y(q.median), x + half, scale.y(q.median), r#"stroke="black" stroke-width="2""#);
    }
    c.finish()
}

/// Series values as points against commit index, with an optional fitted curve.
pub fn series_plot(title: &str, values: &[f64], curve: Option<&dyn Fn(f64) -> f64>) -> String {
    let mut c = Canvas::new(title);
    let n = values.len().max(2);
    let samples: Vec<(f64, f64)> = match curve {
        Some(f) => (0..=200)
            .map(|i| {
                let x = (n - 1) as f64 * i as f64 / 200.0;
                (x, f(x))
            })
            .filter(|(_, y)| y.is_finite())
            .collect(),
        None => Vec::new(),
    };
    let lo = values.iter().chain(samples.iter().map(|(_, y)| y)).fold(f64::INFINITY, |a, &b| a.min(b)).min(0.0);
    let hi = values.iter().chain(samples.iter().map(|(_, y)| y)).fold(0.0, |a: f64, &b| a.max(b));
    let scale = Scale::linear(lo, hi);
    c.axes("instances", &scale.ticks());
    let x_of = |x: f64| LEFT + (W - LEFT - RIGHT) * x / (n - 1) as f64;
    c.text((LEFT + W - RIGHT) / 2.0, H - BOTTOM + 30.0, "middle", "commit");
    for (i, v) in values.iter().enumerate() {
        writeln!(c.out, r##"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="#4c72b0"/>"##, x_of(i as f64), scale.y(*v)).unwrap();
    }
    if !samples.is_empty() {
        let points: Vec<String> = samples.iter().map(|(x, y)| format!("{:.2},{:.2}", x_of(*x), scale.y(*y))).collect();
        writeln!(c.out, r##"<polyline fill="none" stroke="#c44e52" stroke-width="1.5" points="{}"/>"##, points.join(" ")).unwrap();
    }
    c.finish()
}
