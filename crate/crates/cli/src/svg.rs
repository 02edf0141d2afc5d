//! Minimal SVG writer with fixed-precision coordinates, so identical inputs
//! give identical bytes.

use std::fmt::Write as _;

pub const BANNER: &str = concat!("lengyel ", env!("CARGO_PKG_VERSION"));

/// Maps a data window onto a pixel canvas with `y` pointing up.
#[derive(Clone, Copy, Debug)]
pub struct Frame {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub width: f64,
    pub height: f64,
    pub margin: f64,
}

impl Frame {
    pub fn new(x: (f64, f64), y: (f64, f64), width: f64, height: f64) -> Self {
        Self {
            x,
            y,
            width,
            height,
            margin: 40.0,
        }
    }

    pub fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let w = self.width - 2.0 * self.margin;
        let h = self.height - 2.0 * self.margin;
        (
            self.margin + (x - self.x.0) / (self.x.1 - self.x.0) * w,
            self.margin + (1.0 - (y - self.y.0) / (self.y.1 - self.y.0)) * h,
        )
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x.0 && x <= self.x.1 && y >= self.y.0 && y <= self.y.1
    }
}

pub struct Svg {
    body: String,
    width: f64,
    height: f64,
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        Self {
            body: String::new(),
            width,
            height,
        }
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}"/>"#
        );
    }

    pub fn line(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{stroke}" stroke-width="{width}"/>"#,
            a.0, a.1, b.0, b.1
        );
    }

    pub fn circle(&mut self, c: (f64, f64), r: f64, fill: &str, stroke: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{r}" fill="{fill}" stroke="{stroke}"/>"#,
            c.0, c.1
        );
    }

    pub fn text(&mut self, at: (f64, f64), size: f64, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" font-size="{size}" font-family="sans-serif">{}</text>"#,
            at.0,
            at.1,
            escape(s)
        );
    }

    /// Polyline through pixel points; breaks are not inserted.
    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64, dashed: bool) {
        if pts.len() < 2 {
            return;
        }
        let mut d = String::with_capacity(pts.len() * 16);
        for (i, (x, y)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{x:.2},{y:.2}", if i == 0 { "M" } else { " L" });
        }
        let dash = if dashed {
            r#" stroke-dasharray="6,4""#
        } else {
            ""
        };
        let _ = writeln!(
            self.body,
            r#"<path d="{d}" fill="none" stroke="{stroke}" stroke-width="{width}"{dash}/>"#
        );
    }

    /// Axes box with min/max tick labels.
    pub fn axes(&mut self, f: &Frame, x_label: &str, y_label: &str) {
        let (x0, y0) = f.px(f.x.0, f.y.0);
        let (x1, y1) = f.px(f.x.1, f.y.1);
        let _ = writeln!(
            self.body,
            r##"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
            x1 - x0,
            y0 - y1
        );
        self.text((x0, y0 + 16.0), 11.0, &format!("{:.3}", f.x.0));
        self.text((x1 - 30.0, y0 + 16.0), 11.0, &format!("{:.3}", f.x.1));
        self.text((x0 - 36.0, y0), 11.0, &format!("{:.3}", f.y.0));
        self.text((x0 - 36.0, y1 + 10.0), 11.0, &format!("{:.3}", f.y.1));
        self.text((0.5 * (x0 + x1), y0 + 30.0), 13.0, x_label);
        self.text((4.0, 0.5 * (y0 + y1)), 13.0, y_label);
    }

    pub fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!-- {BANNER} -->\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n",
            w = self.width,
            h = self.height,
            body = self.body
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
