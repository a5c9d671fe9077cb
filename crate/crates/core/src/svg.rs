//! SVG rendering of planar tessellations: 1 unit = 100 px, y axis up.

use std::fmt::Write;

use crate::error::{Result, StitError};
use crate::geometry::{dot, ConvexBody, Hyperplane, Point2, Polytope, EPS};
use crate::pht::PoissonHyperplanePattern;
use crate::tessellation::Tessellation;

const SCALE: f64 = 100.0;

struct Canvas {
    x0: f64,
    y1: f64,
    out: String,
}

impl Canvas {
    fn new(window: &Polytope) -> Result<Self> {
        if window.dim() != 2 {
            return Err(StitError::DimensionMismatch {
                expected: 2,
                got: window.dim(),
            });
        }
        let (x0, x1) = (-window.support(&[-1.0, 0.0]), window.support(&[1.0, 0.0]));
        let (y0, y1) = (-window.support(&[0.0, -1.0]), window.support(&[0.0, 1.0]));
        let (w, h) = ((x1 - x0) * SCALE, (y1 - y0) * SCALE);
        let mut out = String::new();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.3}" height="{h:.3}" viewBox="0 0 {w:.3} {h:.3}">"#
        )
        .expect("string write");
        let mut c = Self { x0, y1, out };
        c.window(window);
        Ok(c)
    }

    fn px(&self, p: Point2) -> (f64, f64) {
        ((p[0] - self.x0) * SCALE, (self.y1 - p[1]) * SCALE)
    }

    fn window(&mut self, window: &Polytope) {
        let style = r#"fill="none" stroke="black" stroke-width="1""#;
        match window {
            Polytope::Box(b) => {
                let (x, y) = self.px([b.lo()[0], b.hi()[1]]);
                let lengths = b.lengths();
                let (w, h) = (lengths[0] * SCALE, lengths[1] * SCALE);
                writeln!(
                    self.out,
                    r#"<rect x="{x:.3}" y="{y:.3}" width="{w:.3}" height="{h:.3}" {style}/>"#
                )
            }
            Polytope::Polygon(p) => {
                let pts: Vec<String> = p
                    .vertices()
                    .iter()
                    .map(|v| {
                        let (x, y) = self.px(*v);
                        format!("{x:.3},{y:.3}")
                    })
                    .collect();
                writeln!(self.out, r#"<polygon points="{}" {style}/>"#, pts.join(" "))
            }
        }
        .expect("string write");
    }

    fn line(&mut self, a: Point2, b: Point2) {
        let (x1, y1) = self.px(a);
        let (x2, y2) = self.px(b);
        writeln!(
            self.out,
            r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="black" stroke-width="1"/>"#
        )
        .expect("string write");
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn on_boundary(window: &[(crate::geometry::Vector, f64)], a: Point2, b: Point2) -> bool {
    window
        .iter()
        .any(|(n, c)| (dot(n, &a) - c).abs() <= EPS && (dot(n, &b) - c).abs() <= EPS)
}

/// Window outline plus every cell edge that is not part of the window boundary.
pub fn render_tessellation(t: &Tessellation) -> Result<String> {
    let mut canvas = Canvas::new(&t.window)?;
    let ineqs = t.window.inequalities();
    let mut edges: Vec<(Point2, Point2)> = Vec::new();
    for cell in &t.cells {
        let verts = cell.vertices_2d().ok_or(StitError::DimensionMismatch {
            expected: 2,
            got: cell.dim(),
        })?;
        for i in 0..verts.len() {
            let (a, b) = (verts[i], verts[(i + 1) % verts.len()]);
            if on_boundary(&ineqs, a, b) {
                continue;
            }
            let e = if (a[0], a[1]) <= (b[0], b[1]) { (a, b) } else { (b, a) };
            if !edges.contains(&e) {
                edges.push(e);
            }
        }
    }
    for (a, b) in edges {
        canvas.line(a, b);
    }
    Ok(canvas.finish())
}

/// Chord of the line `h` through the convex window.
fn chord(window: &Polytope, h: &Hyperplane) -> Option<(Point2, Point2)> {
    let u = h.normal().as_slice();
    let p = [h.offset() * u[0], h.offset() * u[1]];
    let v = [-u[1], u[0]];
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    for (n, c) in window.inequalities() {
        let num = c - dot(&n, &p);
        let den = dot(&n, &v);
        if den.abs() < 1e-15 {
            if num < 0.0 {
                return None;
            }
        } else if den > 0.0 {
            t1 = t1.min(num / den);
        } else {
            t0 = t0.max(num / den);
        }
    }
    (t0 < t1).then(|| {
        (
            [p[0] + t0 * v[0], p[1] + t0 * v[1]],
            [p[0] + t1 * v[0], p[1] + t1 * v[1]],
        )
    })
}

/// Window outline plus the chords of all hyperplanes.
pub fn render_pattern(p: &PoissonHyperplanePattern) -> Result<String> {
    let mut canvas = Canvas::new(&p.window)?;
    for h in &p.hyperplanes {
        if let Some((a, b)) = chord(&p.window, h) {
            canvas.line(a, b);
        }
    }
    Ok(canvas.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Direction, Side};

    #[test]
    fn one_cut_gives_one_line() {
        let w = Polytope::cube(2, 1.0);
        let h = Hyperplane::new(Direction::axis(2, 0), 0.5);
        let t = Tessellation {
            window: w.clone(),
            cells: vec![
                w.clip(&h.half_space(Side::Plus)).unwrap().unwrap(),
                w.clip(&h.half_space(Side::Minus)).unwrap().unwrap(),
            ],
        };
        let svg = render_tessellation(&t).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<rect").count(), 1);
        assert_eq!(svg.matches("<line").count(), 1);
        assert!(svg.contains(r#"x1="150.000""#));
        assert!(svg.contains(r#"width="200.000""#));
    }

    #[test]
    fn pattern_chords_span_window() {
        let w = Polytope::cube(2, 1.0);
        let p = PoissonHyperplanePattern {
            window: w,
            rho: 1.0,
            hyperplanes: vec![Hyperplane::new(Direction::axis(2, 1), 0.0)],
        };
        let svg = render_pattern(&p).unwrap();
        assert!(svg.contains(r#"y1="100.000""#) && svg.contains(r#"y2="100.000""#));
        assert!(render_tessellation(&Tessellation::trivial(Polytope::cube(3, 1.0))).is_err());
    }
}
