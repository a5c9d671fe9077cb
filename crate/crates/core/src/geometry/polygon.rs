use serde::{Deserialize, Serialize};

use super::{dot, ConvexBody, Facet, Segment, Vector, AREA_EPS, EPS};
use crate::error::{Result, StitError};

pub type Point2 = [f64; 2];

/// Convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolygon")]
pub struct Polygon {
    vertices: Vec<Point2>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolygon {
    vertices: Vec<Point2>,
}

impl TryFrom<RawPolygon> for Polygon {
    type Error = StitError;

    fn try_from(raw: RawPolygon) -> Result<Self> {
        Polygon::new(raw.vertices)
    }
}

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl Polygon {
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(StitError::InvalidPolytope(format!("polygon needs 3 vertices, got {n}")));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(StitError::InvalidPolytope("non-finite vertex".into()));
        }
        for i in 0..n {
            let c = cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if c < -EPS {
                return Err(StitError::InvalidPolytope(
                    "vertices are not convex and counterclockwise".into(),
                ));
            }
        }
        let poly = Self { vertices };
        if poly.area() <= AREA_EPS {
            return Err(StitError::InvalidPolytope("polygon has no interior".into()));
        }
        Ok(poly)
    }

    pub(crate) fn from_vertices_unchecked(vertices: Vec<Point2>) -> Self {
        Self { vertices }
    }

    /// Regular `n`-gon inscribed in the circle of radius `r` about the origin.
    pub fn regular(n: usize, r: f64) -> Result<Self> {
        let verts = (0..n)
            .map(|k| {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                [r * phi.cos(), r * phi.sin()]
            })
            .collect();
        Self::new(verts)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        let mut s = 0.0;
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            s += p[0] * q[1] - q[0] * p[1];
        }
        0.5 * s
    }

    pub fn centroid(&self) -> Point2 {
        let n = self.vertices.len();
        // Shift to the first vertex to keep the shoelace sums well conditioned.
        let o = self.vertices[0];
        let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let p = [self.vertices[i][0] - o[0], self.vertices[i][1] - o[1]];
            let q = [
                self.vertices[(i + 1) % n][0] - o[0],
                self.vertices[(i + 1) % n][1] - o[1],
            ];
            let w = p[0] * q[1] - q[0] * p[1];
            a += w;
            cx += (p[0] + q[0]) * w;
            cy += (p[1] + q[1]) * w;
        }
        [o[0] + cx / (3.0 * a), o[1] + cy / (3.0 * a)]
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Outward unit normals and offsets: the polygon is `{ <n, x> <= c }`.
    pub fn inequalities(&self) -> Vec<(Vector, f64)> {
        self.edges()
            .filter_map(|(a, b)| {
                let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                let len = dx.hypot(dy);
                (len > 0.0).then(|| {
                    let n: Vector = [dy / len, -dx / len].into_iter().collect();
                    let c = dot(&n, &a);
                    (n, c)
                })
            })
            .collect()
    }

    pub fn facets(&self) -> Vec<Facet> {
        self.edges()
            .map(|(a, b)| Facet::Edge(Segment::new(&a, &b).expect("planar edge")))
            .collect()
    }

    pub fn scaled(&self, r: f64) -> Self {
        Self {
            vertices: self.vertices.iter().map(|p| [p[0] * r, p[1] * r]).collect(),
        }
    }

    pub fn translated(&self, h: &[f64]) -> Self {
        Self {
            vertices: self.vertices.iter().map(|p| [p[0] + h[0], p[1] + h[1]]).collect(),
        }
    }

    /// Clips against `{ <n, x> <= c }`.
    ///
    /// Strict mode fails with `DegenerateCut` when the line passes within
    /// `EPS` of a vertex. Lenient mode treats such vertices as lying on the
    /// line. `Ok(None)` means the piece has empty interior.
    pub(crate) fn clip(&self, n: &[f64], c: f64, strict: bool) -> Result<Option<Polygon>> {
        let s: Vec<f64> = self.vertices.iter().map(|v| dot(n, v) - c).collect();
        if strict && s.iter().any(|x| x.abs() <= EPS) {
            return Err(StitError::DegenerateCut);
        }
        let snap = |x: f64| if x.abs() <= EPS { 0.0 } else { x };
        let s: Vec<f64> = s.into_iter().map(snap).collect();
        if s.iter().all(|&x| x <= 0.0) {
            return Ok(Some(self.clone()));
        }
        if s.iter().all(|&x| x >= 0.0) {
            return Ok(None);
        }
        let m = self.vertices.len();
        let mut out: Vec<Point2> = Vec::with_capacity(m + 1);
        for i in 0..m {
            let j = (i + 1) % m;
            let (p, q) = (self.vertices[i], self.vertices[j]);
            if s[i] <= 0.0 {
                out.push(p);
            }
            if (s[i] < 0.0 && s[j] > 0.0) || (s[i] > 0.0 && s[j] < 0.0) {
                let t = s[i] / (s[i] - s[j]);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        out.dedup_by(|a, b| (a[0] - b[0]).abs() <= EPS && (a[1] - b[1]).abs() <= EPS);
        while out.len() > 1 {
            let (f, l) = (out[0], out[out.len() - 1]);
            if (f[0] - l[0]).abs() <= EPS && (f[1] - l[1]).abs() <= EPS {
                out.pop();
            } else {
                break;
            }
        }
        if out.len() < 3 {
            return Ok(None);
        }
        let poly = Polygon { vertices: out };
        if poly.area() <= AREA_EPS {
            return Ok(None);
        }
        Ok(Some(poly))
    }

    pub fn contains_point(&self, x: Point2, strict: bool) -> bool {
        self.inequalities().iter().all(|(n, c)| {
            let v = dot(n, &x);
            if strict {
                v < c - EPS
            } else {
                v <= c + EPS
            }
        })
    }
}

impl ConvexBody for Polygon {
    fn dim(&self) -> usize {
        2
    }

    fn support(&self, u: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| v[0] * u[0] + v[1] * u[1])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| (b[0] - a[0]).hypot(b[1] - a[1])).sum()
    }

    fn diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (i, p) in self.vertices.iter().enumerate() {
            for q in &self.vertices[i + 1..] {
                best = best.max((p[0] - q[0]).hypot(p[1] - q[1]));
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Polygon {
        Polygon::new(vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]).unwrap()
    }

    #[test]
    fn rejects_clockwise_and_degenerate() {
        assert!(Polygon::new(vec![[0.0, 0.0], [0.0, 2.0], [2.0, 0.0]]).is_err());
        assert!(Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).is_err());
        assert!(Polygon::new(vec![[0.0, 0.0], [1.0, 0.0]]).is_err());
    }

    #[test]
    fn area_centroid_perimeter() {
        let t = triangle();
        assert_eq!(t.area(), 2.0);
        let c = t.centroid();
        assert!((c[0] - 2.0 / 3.0).abs() < 1e-15 && (c[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((t.perimeter() - (4.0 + 8f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn clip_triangle_by_vertical_line() {
        // x <= 1 keeps a quadrilateral; shoelace on its vertex list gives 1.5.
        let q = triangle().clip(&[1.0, 0.0], 1.0, true).unwrap().unwrap();
        assert_eq!(q.vertices().len(), 4);
        let shoelace = {
            let v = q.vertices();
            let n = v.len();
            0.5 * (0..n)
                .map(|i| v[i][0] * v[(i + 1) % n][1] - v[(i + 1) % n][0] * v[i][1])
                .sum::<f64>()
        };
        assert!((shoelace - 1.5).abs() < 1e-12);
    }

    #[test]
    fn strict_clip_rejects_vertex_hits() {
        assert_eq!(triangle().clip(&[1.0, 0.0], 2.0, true), Err(StitError::DegenerateCut));
        // lenient: the whole triangle lies in x <= 2
        assert_eq!(triangle().clip(&[1.0, 0.0], 2.0, false).unwrap().unwrap().area(), 2.0);
        assert_eq!(triangle().clip(&[-1.0, 0.0], -2.0, false).unwrap(), None);
    }

    #[test]
    fn regular_polygon_diameter() {
        let p = Polygon::regular(64, 1.0).unwrap();
        assert!((p.diameter() - 2.0).abs() < 1e-12);
        let s = Polygon::regular(5, 1.0).unwrap();
        assert!(s.diameter() < 2.0);
    }
}
