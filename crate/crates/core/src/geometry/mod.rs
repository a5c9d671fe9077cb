//! Exact convex-geometry kernel.
//!
//! Two regimes are supported: planar convex polygons with arbitrary normal
//! directions, and axis-aligned boxes in any dimension (cut only by
//! axis-orthogonal hyperplanes). Everything here is immutable and pure.

mod aabox;
mod polygon;
mod polytope;

pub use aabox::AaBox;
pub use polygon::{Point2, Polygon};
pub use polytope::Polytope;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Result, StitError};

/// Absolute tolerance for geometric predicates.
pub const EPS: f64 = 1e-9;
/// Tolerance for unit-norm checks.
pub const UNIT_TOL: f64 = 1e-12;
/// Pieces with smaller area (volume) count as having empty interior.
pub const AREA_EPS: f64 = 1e-12;

pub type Vector = SmallVec<[f64; 3]>;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A unit vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Direction(Vector);

impl Direction {
    /// Validates that `components` already has unit norm.
    pub fn new(components: &[f64]) -> Result<Self> {
        let n = norm(components);
        if components.is_empty() || !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
            return Err(StitError::InvalidDirection(format!(
                "norm {n} is not 1 within {UNIT_TOL}"
            )));
        }
        Ok(Self(components.iter().copied().collect()))
    }

    /// Rescales a non-zero vector to unit length.
    pub fn normalized(components: &[f64]) -> Result<Self> {
        let n = norm(components);
        if components.is_empty() || !n.is_finite() || n == 0.0 {
            return Err(StitError::InvalidDirection("zero or non-finite vector".into()));
        }
        Ok(Self(components.iter().map(|c| c / n).collect()))
    }

    pub fn axis(dim: usize, c: usize) -> Self {
        let mut v: Vector = SmallVec::from_elem(0.0, dim);
        v[c] = 1.0;
        Self(v)
    }

    pub fn from_angle(phi: f64) -> Self {
        Self(SmallVec::from_slice(&[phi.cos(), phi.sin()]))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    /// Index `c` if this is `±e_c`.
    pub fn coordinate_axis(&self) -> Option<usize> {
        let mut found = None;
        for (c, &x) in self.0.iter().enumerate() {
            if (x.abs() - 1.0).abs() <= UNIT_TOL {
                found = Some(c);
            } else if x.abs() > UNIT_TOL {
                return None;
            }
        }
        found
    }

    /// True if the first non-zero component is positive.
    pub fn is_canonical(&self) -> bool {
        self.0.iter().find(|x| **x != 0.0).is_some_and(|x| *x > 0.0)
    }

    /// Angle in `(-pi, pi]` of a planar direction.
    pub fn angle(&self) -> f64 {
        self.0[1].atan2(self.0[0])
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<f64>::deserialize(de)?;
        Direction::normalized(&raw).map_err(serde::de::Error::custom)
    }
}

/// `H(u, d) = { x : <x, u> = d }`, stored with lexicographically positive `u`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hyperplane {
    u: Direction,
    d: f64,
}

impl Hyperplane {
    pub fn new(u: Direction, d: f64) -> Self {
        if u.is_canonical() {
            Self { u, d }
        } else {
            Self { u: u.negated(), d: -d }
        }
    }

    pub fn normal(&self) -> &Direction {
        &self.u
    }

    pub fn offset(&self) -> f64 {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.u.dim()
    }

    /// `<x, u> - d`.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        dot(x, self.u.as_slice()) - self.d
    }

    pub fn half_space(&self, side: Side) -> HalfSpace {
        HalfSpace {
            plane: self.clone(),
            side,
        }
    }

    pub fn translated(&self, h: &[f64]) -> Self {
        let d = self.d + dot(h, self.u.as_slice());
        Self { u: self.u.clone(), d }
    }

    pub fn scaled(&self, r: f64) -> Self {
        Self {
            u: self.u.clone(),
            d: self.d * r,
        }
    }
}

impl<'de> Deserialize<'de> for Hyperplane {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            u: Direction,
            d: f64,
        }
        let raw = Raw::deserialize(de)?;
        Ok(Hyperplane::new(raw.u, raw.d))
    }
}

/// Side of a hyperplane; `Plus` is the closed half-space whose interior
/// holds the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn opposite(self) -> Self {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub plane: Hyperplane,
    pub side: Side,
}

impl HalfSpace {
    /// The half-space as `{ x : <normal, x> <= offset }`.
    pub fn inequality(&self) -> (Vector, f64) {
        let u = self.plane.u.as_slice();
        let d = self.plane.d;
        // Plus is the side holding the origin; for d == 0 pick <u, x> <= 0.
        let flip = (d < 0.0) ^ (self.side == Side::Minus);
        if flip {
            (u.iter().map(|c| -c).collect(), -d)
        } else {
            (u.iter().copied().collect(), d)
        }
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        let (n, c) = self.inequality();
        dot(&n, x) <= c + EPS
    }
}

/// Anything with a support function `h_K(u) = max { <x, u> : x in K }`.
pub trait ConvexBody {
    fn dim(&self) -> usize;
    fn support(&self, u: &[f64]) -> f64;
    /// Boundary length of a planar body; segments count both sides.
    fn perimeter(&self) -> f64;
    /// Largest width over all directions.
    fn diameter(&self) -> f64;
}

pub fn width<B: ConvexBody + ?Sized>(body: &B, u: &Direction) -> f64 {
    let neg = u.negated();
    body.support(u.as_slice()) + body.support(neg.as_slice())
}

/// Projection interval `[-h(-u), h(u)]`.
pub fn projection<B: ConvexBody + ?Sized>(body: &B, u: &[f64]) -> (f64, f64) {
    let neg: Vector = u.iter().map(|c| -c).collect();
    (-body.support(&neg), body.support(u))
}

pub fn hits<B: ConvexBody + ?Sized>(h: &Hyperplane, body: &B) -> bool {
    let (lo, hi) = projection(body, h.u.as_slice());
    lo <= h.d && h.d <= hi
}

/// True iff `h` strictly separates `a` from `b`.
pub fn separates<A, B>(h: &Hyperplane, a: &A, b: &B) -> bool
where
    A: ConvexBody + ?Sized,
    B: ConvexBody + ?Sized,
{
    let (alo, ahi) = projection(a, h.u.as_slice());
    let (blo, bhi) = projection(b, h.u.as_slice());
    let d = h.d;
    (ahi < d - EPS && blo > d + EPS) || (bhi < d - EPS && alo > d + EPS)
}

/// A closed line segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Vector,
    pub b: Vector,
}

impl Segment {
    pub fn new(a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(StitError::DimensionMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        Ok(Self {
            a: a.iter().copied().collect(),
            b: b.iter().copied().collect(),
        })
    }

    pub fn length(&self) -> f64 {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    pub fn translated(&self, h: &[f64]) -> Self {
        Self {
            a: self.a.iter().zip(h).map(|(x, y)| x + y).collect(),
            b: self.b.iter().zip(h).map(|(x, y)| x + y).collect(),
        }
    }
}

impl ConvexBody for Segment {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn support(&self, u: &[f64]) -> f64 {
        dot(&self.a, u).max(dot(&self.b, u))
    }

    fn perimeter(&self) -> f64 {
        2.0 * self.length()
    }

    fn diameter(&self) -> f64 {
        self.length()
    }
}

/// An `(l-1)`-dimensional facet of a polytope.
#[derive(Debug, Clone, PartialEq)]
pub enum Facet {
    Edge(Segment),
    /// Face of a box: `lo == hi` on the fixed axis.
    Face {
        lo: Vector,
        hi: Vector,
    },
}

impl ConvexBody for Facet {
    fn dim(&self) -> usize {
        match self {
            Facet::Edge(s) => s.dim(),
            Facet::Face { lo, .. } => lo.len(),
        }
    }

    fn support(&self, u: &[f64]) -> f64 {
        match self {
            Facet::Edge(s) => s.support(u),
            Facet::Face { lo, hi } => aabox::box_support(lo, hi, u),
        }
    }

    fn perimeter(&self) -> f64 {
        match self {
            Facet::Edge(s) => s.perimeter(),
            Facet::Face { lo, hi } => {
                let lengths: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| h - l).collect();
                aabox::surface_from_lengths(&lengths)
            }
        }
    }

    fn diameter(&self) -> f64 {
        match self {
            Facet::Edge(s) => s.length(),
            Facet::Face { lo, hi } => norm(&lo.iter().zip(hi).map(|(l, h)| h - l).collect::<Vec<_>>()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polytope {
        Polytope::cube(2, 1.0)
    }

    #[test]
    fn direction_validation() {
        assert!(Direction::new(&[1.0, 0.0]).is_ok());
        assert!(Direction::new(&[1.0, 1.0]).is_err());
        let d = Direction::normalized(&[3.0, 4.0]).unwrap();
        assert!((norm(d.as_slice()) - 1.0).abs() < UNIT_TOL);
        assert_eq!(Direction::axis(3, 1).coordinate_axis(), Some(1));
        assert_eq!(Direction::axis(2, 0).negated().coordinate_axis(), Some(0));
        assert_eq!(Direction::from_angle(0.3).coordinate_axis(), None);
    }

    #[test]
    fn hyperplane_canonical_form() {
        let h = Hyperplane::new(Direction::new(&[-1.0, 0.0]).unwrap(), -2.0);
        assert_eq!(h.normal().as_slice(), &[1.0, 0.0]);
        assert_eq!(h.offset(), 2.0);
        let g = Hyperplane::new(Direction::new(&[0.0, -1.0]).unwrap(), 0.5);
        assert_eq!(g.normal().as_slice(), &[0.0, 1.0]);
        assert_eq!(g.offset(), -0.5);
    }

    #[test]
    fn plus_side_contains_origin() {
        for d in [-0.7, 0.7] {
            let h = Hyperplane::new(Direction::from_angle(1.1), d);
            assert!(h.half_space(Side::Plus).contains_point(&[0.0, 0.0]));
            assert!(!h.half_space(Side::Minus).contains_point(&[0.0, 0.0]));
        }
    }

    #[test]
    fn hits_examples() {
        let sq = unit_square();
        let e1 = Direction::axis(2, 0);
        assert!(hits(&Hyperplane::new(e1.clone(), 0.5), &sq));
        assert!(!hits(&Hyperplane::new(e1, 1.5), &sq));
        let diag = Direction::new(&[0.5f64.sqrt(), 0.5f64.sqrt()]).unwrap();
        // 1.41 <= sqrt(2)
        assert!(hits(&Hyperplane::new(diag, 1.41), &sq));
    }

    #[test]
    fn separates_examples() {
        let a = unit_square();
        let b = Polytope::aabox(&[5.0, -1.0], &[7.0, 1.0]).unwrap();
        let e1 = Direction::axis(2, 0);
        let e2 = Direction::axis(2, 1);
        assert!(separates(&Hyperplane::new(e1.clone(), 3.0), &a, &b));
        assert!(separates(&Hyperplane::new(e1.clone(), 3.0), &b, &a));
        assert!(!separates(&Hyperplane::new(e1, 0.0), &a, &b));
        assert!(!separates(&Hyperplane::new(e2, 3.0), &a, &b));
    }

    #[test]
    fn segment_support_and_width() {
        let s = Segment::new(&[-1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(width(&s, &Direction::axis(2, 0)), 2.0);
        assert_eq!(width(&s, &Direction::axis(2, 1)), 0.0);
        assert_eq!(s.perimeter(), 4.0);
    }
}
