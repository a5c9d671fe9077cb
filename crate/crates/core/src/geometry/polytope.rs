use serde::{Deserialize, Serialize};

use super::{dot, AaBox, ConvexBody, Facet, HalfSpace, Point2, Polygon, Segment, Vector, EPS};
use crate::error::{Result, StitError};

/// A compact convex polytope with non-empty interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Polytope {
    Polygon(Polygon),
    Box(AaBox),
}

impl Polytope {
    pub fn polygon(vertices: Vec<Point2>) -> Result<Self> {
        Polygon::new(vertices).map(Polytope::Polygon)
    }

    pub fn aabox(lo: &[f64], hi: &[f64]) -> Result<Self> {
        AaBox::new(lo, hi).map(Polytope::Box)
    }

    /// `[-a, a]^dim`.
    pub fn cube(dim: usize, a: f64) -> Self {
        let lo = vec![-a; dim];
        let hi = vec![a; dim];
        Polytope::Box(AaBox::new(&lo, &hi).expect("positive half-width"))
    }

    pub fn is_box(&self) -> bool {
        matches!(self, Polytope::Box(_))
    }

    /// Area in the plane, volume for boxes.
    pub fn volume(&self) -> f64 {
        match self {
            Polytope::Polygon(p) => p.area(),
            Polytope::Box(b) => b.volume(),
        }
    }

    /// Perimeter in the plane, `(l-1)`-volume of the boundary for boxes.
    pub fn surface(&self) -> f64 {
        match self {
            Polytope::Polygon(p) => p.perimeter(),
            Polytope::Box(b) => b.surface(),
        }
    }

    pub fn centroid(&self) -> Vector {
        match self {
            Polytope::Polygon(p) => p.centroid().into_iter().collect(),
            Polytope::Box(b) => b.center(),
        }
    }

    /// Vertex list of a planar polytope.
    pub fn vertices_2d(&self) -> Option<Vec<Point2>> {
        match self {
            Polytope::Polygon(p) => Some(p.vertices().to_vec()),
            Polytope::Box(b) if b.lo().len() == 2 => {
                let (lo, hi) = (b.lo(), b.hi());
                Some(vec![[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
            }
            Polytope::Box(_) => None,
        }
    }

    /// The same set as a polygon (planar only).
    pub fn to_polygon(&self) -> Result<Polygon> {
        match self {
            Polytope::Polygon(p) => Ok(p.clone()),
            Polytope::Box(b) => match self.vertices_2d() {
                Some(v) => Ok(Polygon::from_vertices_unchecked(v)),
                None => Err(StitError::DimensionMismatch {
                    expected: 2,
                    got: b.lo().len(),
                }),
            },
        }
    }

    /// Outward normals and offsets of the facets: `P = { <n, x> <= c }`.
    pub fn inequalities(&self) -> Vec<(Vector, f64)> {
        match self {
            Polytope::Polygon(p) => p.inequalities(),
            Polytope::Box(b) => b.inequalities(),
        }
    }

    /// Facets, aligned with `inequalities()`.
    pub fn facets(&self) -> Vec<Facet> {
        match self {
            Polytope::Polygon(p) => p.facets(),
            Polytope::Box(b) => b.facets(),
        }
    }

    pub fn support_function(&self, u: &[f64]) -> f64 {
        self.support(u)
    }

    /// `P ∩ hs`; `Ok(None)` when the intersection has empty interior.
    pub fn clip(&self, hs: &HalfSpace) -> Result<Option<Polytope>> {
        self.clip_with(hs, true)
    }

    /// Like [`Polytope::clip`] but vertices within tolerance of the
    /// hyperplane are treated as lying on it instead of failing.
    pub fn clip_lenient(&self, hs: &HalfSpace) -> Option<Polytope> {
        self.clip_with(hs, false).expect("lenient clipping does not fail")
    }

    fn clip_with(&self, hs: &HalfSpace, strict: bool) -> Result<Option<Polytope>> {
        if hs.plane.dim() != self.dim() {
            return Err(StitError::DimensionMismatch {
                expected: self.dim(),
                got: hs.plane.dim(),
            });
        }
        let (n, c) = hs.inequality();
        match self {
            Polytope::Polygon(p) => Ok(p.clip(&n, c, strict)?.map(Polytope::Polygon)),
            Polytope::Box(b) => match hs.plane.normal().coordinate_axis() {
                Some(axis) => {
                    let sign = n[axis].signum();
                    Ok(b.clip_axis(axis, sign, c, strict)?.map(Polytope::Box))
                }
                None if b.lo().len() == 2 => Ok(self.to_polygon()?.clip(&n, c, strict)?.map(Polytope::Polygon)),
                None => Err(StitError::UnsupportedCut(
                    "boxes in dimension != 2 only accept axis-orthogonal cuts".into(),
                )),
            },
        }
    }

    /// `P ∩ Q`, or `None` when the intersection has empty interior.
    pub fn intersect(&self, other: &Polytope) -> Result<Option<Polytope>> {
        if self.dim() != other.dim() {
            return Err(StitError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        if let (Polytope::Box(a), Polytope::Box(b)) = (self, other) {
            return Ok(a.intersect(b).map(Polytope::Box));
        }
        let mut acc = self.to_polygon()?;
        for (n, c) in other.inequalities() {
            match acc.clip(&n, c, false)? {
                Some(p) => acc = p,
                None => return Ok(None),
            }
        }
        Ok(Some(Polytope::Polygon(acc)))
    }

    /// `Q ⊆ P` (non-strict, tolerance `EPS`) or `Q ⊂ Int(P)` with margin `EPS`.
    pub fn contains(&self, q: &Polytope, strict: bool) -> bool {
        self.dim() == q.dim()
            && self.inequalities().iter().all(|(n, c)| {
                let h = q.support(n);
                if strict {
                    h < c - EPS
                } else {
                    h <= c + EPS
                }
            })
    }

    pub fn contains_point(&self, x: &[f64], strict: bool) -> bool {
        self.inequalities().iter().all(|(n, c)| {
            let v = dot(n, x);
            if strict {
                v < c - EPS
            } else {
                v <= c + EPS
            }
        })
    }

    /// Length of `seg ∩ P`.
    pub fn chord_length(&self, seg: &Segment) -> f64 {
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        let dirv: Vector = seg.a.iter().zip(&seg.b).map(|(a, b)| b - a).collect();
        for (n, c) in self.inequalities() {
            let num = c - dot(&n, &seg.a);
            let den = dot(&n, &dirv);
            if den.abs() < 1e-300 {
                if num < 0.0 {
                    return 0.0;
                }
            } else if den > 0.0 {
                t1 = t1.min(num / den);
            } else {
                t0 = t0.max(num / den);
            }
            if t0 >= t1 {
                return 0.0;
            }
        }
        (t1 - t0) * seg.length()
    }

    pub fn scale(&self, r: f64) -> Result<Polytope> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(StitError::NonPositiveScale(r));
        }
        Ok(match self {
            Polytope::Polygon(p) => Polytope::Polygon(p.scaled(r)),
            Polytope::Box(b) => Polytope::Box(b.scaled(r)),
        })
    }

    pub fn translate(&self, h: &[f64]) -> Result<Polytope> {
        if h.len() != self.dim() {
            return Err(StitError::DimensionMismatch {
                expected: self.dim(),
                got: h.len(),
            });
        }
        Ok(match self {
            Polytope::Polygon(p) => Polytope::Polygon(p.translated(h)),
            Polytope::Box(b) => Polytope::Box(b.translated(h)),
        })
    }
}

impl ConvexBody for Polytope {
    fn dim(&self) -> usize {
        match self {
            Polytope::Polygon(_) => 2,
            Polytope::Box(b) => b.dim(),
        }
    }

    fn support(&self, u: &[f64]) -> f64 {
        match self {
            Polytope::Polygon(p) => p.support(u),
            Polytope::Box(b) => b.support(u),
        }
    }

    fn perimeter(&self) -> f64 {
        self.surface()
    }

    fn diameter(&self) -> f64 {
        match self {
            Polytope::Polygon(p) => p.diameter(),
            Polytope::Box(b) => b.diameter(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{hits, separates, width, Direction, Hyperplane, Side};
    use proptest::prelude::*;

    fn sq() -> Polytope {
        Polytope::cube(2, 1.0)
    }

    fn tri() -> Polytope {
        Polytope::polygon(vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]).unwrap()
    }

    #[test]
    fn support_function_examples() {
        assert_eq!(sq().support_function(&[1.0, 0.0]), 1.0);
        let h = 0.5f64.sqrt();
        assert!((sq().support_function(&[h, h]) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(tri().support_function(&[0.0, -1.0]), 0.0);
    }

    #[test]
    fn width_examples() {
        assert_eq!(width(&sq(), &Direction::axis(2, 1)), 2.0);
        let b = Polytope::aabox(&[0.0, 0.0], &[2.0, 1.0]).unwrap();
        assert_eq!(width(&b, &Direction::axis(2, 0)), 2.0);
        // 64-gon approximating the unit disc: widths within 0.003 of 2
        let disc = Polytope::Polygon(Polygon::regular(64, 1.0).unwrap());
        for k in 0..50 {
            let w = width(&disc, &Direction::from_angle(k as f64 * 0.1237));
            assert!((w - 2.0).abs() < 0.003, "{w}");
        }
    }

    #[test]
    fn clip_box_examples() {
        let left = Hyperplane::new(Direction::axis(2, 0), 0.0).half_space(Side::Plus);
        assert_eq!(
            sq().clip(&left).unwrap().unwrap(),
            Polytope::aabox(&[-1.0, -1.0], &[0.0, 1.0]).unwrap()
        );
        let whole = Hyperplane::new(Direction::axis(2, 0), 3.0).half_space(Side::Plus);
        assert_eq!(sq().clip(&whole).unwrap().unwrap(), sq());
        assert_eq!(sq().clip(&whole.plane.half_space(Side::Minus)).unwrap(), None);
    }

    #[test]
    fn clip_triangle_area() {
        let hs = Hyperplane::new(Direction::axis(2, 0), 1.0).half_space(Side::Plus);
        let q = tri().clip(&hs).unwrap().unwrap();
        assert!((q.volume() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn oblique_cut_of_planar_box() {
        let h = Hyperplane::new(Direction::from_angle(0.7), 0.3);
        let a = sq().clip(&h.half_space(Side::Plus)).unwrap().unwrap();
        let b = sq().clip(&h.half_space(Side::Minus)).unwrap().unwrap();
        assert!((a.volume() + b.volume() - 4.0).abs() < 1e-12);
        let cube3 = Polytope::cube(3, 1.0);
        let g = Hyperplane::new(Direction::normalized(&[1.0, 1.0, 0.0]).unwrap(), 0.1);
        assert!(matches!(
            cube3.clip(&g.half_space(Side::Plus)),
            Err(StitError::UnsupportedCut(_))
        ));
    }

    #[test]
    fn contains_examples() {
        let big = Polytope::cube(2, 2.0);
        assert!(big.contains(&sq(), true));
        assert!(!big.contains(&big, true));
        assert!(big.contains(&big, false));
        let off = Polytope::aabox(&[-1.0, -1.0], &[3.0, 1.0]).unwrap();
        assert!(!big.contains(&off, true));
        assert!(!big.contains(&off, false));
    }

    #[test]
    fn scale_translate_examples() {
        assert_eq!(sq().scale(2.0).unwrap(), Polytope::cube(2, 2.0));
        assert_eq!(
            sq().translate(&[5.0, 0.0]).unwrap(),
            Polytope::aabox(&[4.0, -1.0], &[6.0, 1.0]).unwrap()
        );
        let t = Polytope::polygon(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(
            t.scale(2.0).unwrap(),
            Polytope::polygon(vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]).unwrap()
        );
        assert_eq!(sq().scale(0.0), Err(StitError::NonPositiveScale(0.0)));
    }

    #[test]
    fn chord_length_of_segments() {
        let s = Segment::new(&[-3.0, 0.0], &[3.0, 0.0]).unwrap();
        assert!((sq().chord_length(&s) - 2.0).abs() < 1e-12);
        let miss = Segment::new(&[-3.0, 5.0], &[3.0, 5.0]).unwrap();
        assert_eq!(sq().chord_length(&miss), 0.0);
        let disc = Polytope::Polygon(Polygon::regular(4, 1.0).unwrap());
        assert!((disc.chord_length(&s) - 2.0).abs() < 1e-12);
    }

    fn arb_polygon() -> impl Strategy<Value = Polytope> {
        (3usize..9, 0.5f64..3.0, -2.0f64..2.0, -2.0f64..2.0, 0.0f64..1.0).prop_map(|(n, r, x, y, rot)| {
            let v = (0..n)
                .map(|k| {
                    let phi = rot + 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    [x + r * phi.cos(), y + r * phi.sin()]
                })
                .collect();
            Polytope::polygon(v).unwrap()
        })
    }

    fn arb_box() -> impl Strategy<Value = Polytope> {
        (-3.0f64..0.0, -3.0f64..0.0, 0.1f64..4.0, 0.1f64..4.0)
            .prop_map(|(x, y, w, h)| Polytope::aabox(&[x, y], &[x + w, y + h]).unwrap())
    }

    fn arb_body() -> impl Strategy<Value = Polytope> {
        prop_oneof![arb_polygon(), arb_box()]
    }

    proptest! {
        #[test]
        fn clip_partitions_area(p in arb_body(), phi in 0.0f64..std::f64::consts::PI, d in -4.0f64..4.0) {
            let h = Hyperplane::new(Direction::from_angle(phi), d);
            let a = p.clip(&h.half_space(Side::Plus));
            let b = p.clip(&h.half_space(Side::Minus));
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    let total = a.as_ref().map_or(0.0, |x| x.volume()) + b.as_ref().map_or(0.0, |x| x.volume());
                    prop_assert!((total - p.volume()).abs() <= 1e-9 * p.volume());
                    prop_assert_eq!(hits(&h, &p), a.is_some() && b.is_some());
                }
                (Err(StitError::DegenerateCut), _) | (_, Err(StitError::DegenerateCut)) => {}
                other => prop_assert!(false, "unexpected {:?}", other),
            }
        }

        #[test]
        fn axis_clip_partitions_box(p in arb_box(), axis in 0usize..2, d in -4.0f64..4.0) {
            let h = Hyperplane::new(Direction::axis(2, axis), d);
            if let (Ok(a), Ok(b)) = (p.clip(&h.half_space(Side::Plus)), p.clip(&h.half_space(Side::Minus))) {
                let total = a.as_ref().map_or(0.0, |x| x.volume()) + b.as_ref().map_or(0.0, |x| x.volume());
                prop_assert!((total - p.volume()).abs() <= 1e-9 * p.volume());
                prop_assert_eq!(hits(&h, &p), a.is_some() && b.is_some());
            }
        }

        #[test]
        fn separating_hyperplanes_miss_both(a in arb_body(), b in arb_body(), phi in 0.0f64..std::f64::consts::PI, d in -6.0f64..6.0) {
            let b = b.translate(&[4.0, 1.0]).unwrap();
            let h = Hyperplane::new(Direction::from_angle(phi), d);
            if separates(&h, &a, &b) {
                prop_assert!(!hits(&h, &a) && !hits(&h, &b));
            }
        }

        #[test]
        fn support_scales_linearly(p in arb_body(), phi in 0.0f64..std::f64::consts::TAU, r in 0.1f64..10.0) {
            let u = Direction::from_angle(phi);
            let lhs = p.scale(r).unwrap().support_function(u.as_slice());
            let rhs = r * p.support_function(u.as_slice());
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn contains_is_reflexive_and_transitive(p in arb_body(), s1 in 0.2f64..1.0, s2 in 0.2f64..1.0) {
            // Shrink about an interior point to get a nested chain.
            let c = p.centroid();
            let shrink = |q: &Polytope, s: f64| {
                q.translate(&[-c[0], -c[1]]).unwrap().scale(s).unwrap().translate(&[c[0], c[1]]).unwrap()
            };
            let q = shrink(&p, s1);
            let r = shrink(&q, s2);
            prop_assert!(p.contains(&p, false));
            prop_assert!(p.contains(&q, false) && q.contains(&r, false) && p.contains(&r, false));
            if s1 < 0.99 {
                prop_assert!(!q.contains(&p, false));
            }
        }
    }
}
