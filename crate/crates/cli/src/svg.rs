//! Static SVG drawing of edges, arcs and zero clouds.

use std::fmt::Write;

use trisheet::Complex64;

#[derive(Debug, Default)]
pub struct Figure {
    pub hard: Vec<Complex64>,
    pub soft: Vec<Complex64>,
    pub arcs: Vec<Vec<Complex64>>,
    pub dots: Vec<Complex64>,
}

const SIZE: f64 = 800.0;

impl Figure {
    /// Axis limits fit the edges with a 20% margin on each side.
    fn limits(&self) -> (f64, f64, f64, f64) {
        let edges: Vec<Complex64> = self.hard.iter().chain(self.soft.iter()).copied().collect();
        let fold = |f: fn(&Complex64) -> f64, init: f64, pick: fn(f64, f64) -> f64| {
            edges.iter().map(f).fold(init, pick)
        };
        let (x0, x1) = (fold(|z| z.re, f64::INFINITY, f64::min), fold(|z| z.re, f64::NEG_INFINITY, f64::max));
        let (y0, y1) = (fold(|z| z.im, f64::INFINITY, f64::min), fold(|z| z.im, f64::NEG_INFINITY, f64::max));
        let span = (x1 - x0).max(y1 - y0).max(1e-9);
        let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
        let half = 0.5 * span * 1.4;
        (cx - half, cx + half, cy - half, cy + half)
    }

    pub fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.limits();
        let sx = |x: f64| (x - x0) / (x1 - x0) * SIZE;
        let sy = |y: f64| (y1 - y) / (y1 - y0) * SIZE;
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        if y0 < 0.0 && y1 > 0.0 {
            let _ = writeln!(
                out,
                r##"<line x1="0" y1="{:.2}" x2="{SIZE}" y2="{:.2}" stroke="#ccc" stroke-width="0.5"/>"##,
                sy(0.0),
                sy(0.0)
            );
        }
        for arc in &self.arcs {
            let pts: Vec<String> = arc.iter().map(|z| format!("{:.2},{:.2}", sx(z.re), sy(z.im))).collect();
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="black" stroke-width="1"/>"#,
                pts.join(" ")
            );
        }
        for z in &self.dots {
            let _ = writeln!(
                out,
                r##"<circle cx="{:.2}" cy="{:.2}" r="2" fill="#1f5fbf"/>"##,
                sx(z.re),
                sy(z.im)
            );
        }
        for z in &self.soft {
            let _ = writeln!(
                out,
                r##"<circle cx="{:.2}" cy="{:.2}" r="6" fill="none" stroke="#b22" stroke-width="1.5"/>"##,
                sx(z.re),
                sy(z.im)
            );
        }
        for z in &self.hard {
            let (x, y) = (sx(z.re), sy(z.im));
            let _ = writeln!(
                out,
                r##"<path d="M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}" stroke="#b22" stroke-width="2"/>"##,
                x - 6.0,
                y - 6.0,
                x + 6.0,
                y + 6.0,
                x - 6.0,
                y + 6.0,
                x + 6.0,
                y - 6.0
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn markers_and_arcs_are_drawn() {
        let fig = Figure {
            hard: vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
            soft: vec![Complex64::new(0.3, 0.0)],
            arcs: vec![vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)]],
            dots: vec![],
        };
        let svg = fig.render();
        assert_eq!(svg.matches("<path").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert_eq!(svg.matches("<polyline").count(), 1);
        // Edges at x = -1 and 1 sit 20% in from the sides of a 2.8-wide window.
        assert!(svg.contains("M108.29,"));
    }
}
