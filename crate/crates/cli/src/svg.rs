//! Minimal SVG scatter plots with equal x/y scale.

use std::fmt::Write as _;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 30.0;

pub struct Canvas {
    x0: f64,
    y0: f64,
    scale: f64,
    body: String,
}

impl Canvas {
    /// Fits `[x_min, x_max] × [y_min, y_max]` into a square canvas.
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        let span = (x_max - x_min).max(y_max - y_min).max(1e-12);
        let scale = (SIZE - 2.0 * MARGIN) / span;
        // Centre the shorter axis.
        let x0 = x_min - 0.5 * (span - (x_max - x_min));
        let y0 = y_min - 0.5 * (span - (y_max - y_min));
        Self {
            x0,
            y0,
            scale,
            body: String::new(),
        }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        (
            MARGIN + (x - self.x0) * self.scale,
            SIZE - MARGIN - (y - self.y0) * self.scale,
        )
    }

    pub fn line(&mut self, a: [f64; 2], b: [f64; 2], stroke: &str, width: f64) {
        let (x1, y1) = self.px(a[0], a[1]);
        let (x2, y2) = self.px(b[0], b[1]);
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="{width}"/>"#
        );
    }

    /// Filled marker of fixed pixel radius.
    pub fn dot(&mut self, p: [f64; 2], r: f64, fill: &str) {
        let (cx, cy) = self.px(p[0], p[1]);
        let _ = writeln!(
            self.body,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r}" fill="{fill}"/>"#
        );
    }

    /// Outline of a circle with radius in data units.
    pub fn ring(&mut self, center: [f64; 2], radius: f64, stroke: &str, dashed: bool) {
        let (cx, cy) = self.px(center[0], center[1]);
        let r = radius * self.scale;
        let dash = if dashed { r#" stroke-dasharray="4 3""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="none" stroke="{stroke}" stroke-width="0.8"{dash}/>"#
        );
    }

    /// Coordinate axes through the origin, clipped to the plotted range.
    pub fn axes(&mut self) {
        let span = (SIZE - 2.0 * MARGIN) / self.scale;
        let (xa, xb) = (self.x0, self.x0 + span);
        let (ya, yb) = (self.y0, self.y0 + span);
        if (ya..=yb).contains(&0.0) {
            self.line([xa, 0.0], [xb, 0.0], "#888", 1.0);
        }
        if (xa..=xb).contains(&0.0) {
            self.line([0.0, ya], [0.0, yb], "#888", 1.0);
        }
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maps_corners_and_emits_elements() {
        let mut c = Canvas::new(0.0, 1.0, 0.0, 1.0);
        assert_eq!(c.px(0.0, 0.0), (MARGIN, SIZE - MARGIN));
        assert_eq!(c.px(1.0, 1.0), (SIZE - MARGIN, MARGIN));
        c.axes();
        c.dot([0.5, 0.5], 2.0, "black");
        c.ring([0.5, 0.5], 0.25, "red", true);
        let svg = c.finish();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<line").count(), 2);
        assert!(svg.contains(r#"r="135.00""#));
        assert!(svg.contains("stroke-dasharray"));
    }

    #[test]
    fn shorter_axis_is_centred() {
        let c = Canvas::new(0.0, 2.0, 0.0, 1.0);
        let (_, y) = c.px(0.0, 0.5);
        assert!((y - SIZE / 2.0).abs() < 1e-9);
    }
}
