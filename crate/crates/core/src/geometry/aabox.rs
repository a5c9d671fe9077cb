use serde::{Deserialize, Serialize};

use super::{ConvexBody, Facet, Vector, AREA_EPS, EPS};
use crate::error::{Result, StitError};

/// Axis-aligned box `prod_c [lo_c, hi_c]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox")]
pub struct AaBox {
    lo: Vector,
    hi: Vector,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl TryFrom<RawBox> for AaBox {
    type Error = StitError;

    fn try_from(raw: RawBox) -> Result<Self> {
        AaBox::new(&raw.lo, &raw.hi)
    }
}

pub(crate) fn box_support(lo: &[f64], hi: &[f64], u: &[f64]) -> f64 {
    lo.iter().zip(hi).zip(u).map(|((l, h), uc)| (uc * l).max(uc * h)).sum()
}

/// Surface measure of a box with the given edge lengths.
pub(crate) fn surface_from_lengths(lengths: &[f64]) -> f64 {
    (0..lengths.len())
        .map(|c| {
            2.0 * lengths
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != c)
                .map(|(_, l)| l)
                .product::<f64>()
        })
        .sum()
}

impl AaBox {
    pub fn new(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(StitError::InvalidPolytope(
                "box bounds must have equal, non-zero length".into(),
            ));
        }
        if lo.iter().chain(hi).any(|x| !x.is_finite()) {
            return Err(StitError::InvalidPolytope("non-finite box bound".into()));
        }
        if lo.iter().zip(hi).any(|(l, h)| l >= h) {
            return Err(StitError::InvalidPolytope("box needs lo < hi on every axis".into()));
        }
        Ok(Self {
            lo: lo.iter().copied().collect(),
            hi: hi.iter().copied().collect(),
        })
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).collect()
    }

    pub fn center(&self) -> Vector {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    pub fn surface(&self) -> f64 {
        surface_from_lengths(&self.lengths())
    }

    /// Faces in the order `+e_0, -e_0, +e_1, -e_1, ...`.
    pub fn facets(&self) -> Vec<Facet> {
        let mut out = Vec::with_capacity(2 * self.lo.len());
        for c in 0..self.lo.len() {
            for x in [self.hi[c], self.lo[c]] {
                let mut lo = self.lo.clone();
                let mut hi = self.hi.clone();
                lo[c] = x;
                hi[c] = x;
                out.push(Facet::Face { lo, hi });
            }
        }
        out
    }

    pub fn inequalities(&self) -> Vec<(Vector, f64)> {
        let l = self.lo.len();
        let mut out = Vec::with_capacity(2 * l);
        for c in 0..l {
            let mut e: Vector = smallvec::smallvec![0.0; l];
            e[c] = 1.0;
            out.push((e.clone(), self.hi[c]));
            e[c] = -1.0;
            out.push((e, -self.lo[c]));
        }
        out
    }

    /// Clips against `{ sign * x_axis <= c }`.
    pub(crate) fn clip_axis(&self, axis: usize, sign: f64, c: f64, strict: bool) -> Result<Option<AaBox>> {
        let (lo, hi) = (self.lo[axis], self.hi[axis]);
        let bound = sign * c;
        if strict && ((bound - lo).abs() <= EPS || (bound - hi).abs() <= EPS) {
            return Err(StitError::DegenerateCut);
        }
        let mut out = self.clone();
        if sign > 0.0 {
            if bound >= hi - EPS {
                return Ok(Some(out));
            }
            if bound <= lo + EPS {
                return Ok(None);
            }
            out.hi[axis] = bound;
        } else {
            if bound <= lo + EPS {
                return Ok(Some(out));
            }
            if bound >= hi - EPS {
                return Ok(None);
            }
            out.lo[axis] = bound;
        }
        Ok(Some(out))
    }

    pub(crate) fn intersect(&self, other: &AaBox) -> Option<AaBox> {
        let lo: Vector = self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect();
        let hi: Vector = self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect();
        let b = AaBox { lo, hi };
        let ok = b.lo.iter().zip(&b.hi).all(|(l, h)| h - l > 0.0) && b.volume() > AREA_EPS;
        ok.then_some(b)
    }

    pub fn scaled(&self, r: f64) -> Self {
        Self {
            lo: self.lo.iter().map(|x| x * r).collect(),
            hi: self.hi.iter().map(|x| x * r).collect(),
        }
    }

    pub fn translated(&self, h: &[f64]) -> Self {
        Self {
            lo: self.lo.iter().zip(h).map(|(x, y)| x + y).collect(),
            hi: self.hi.iter().zip(h).map(|(x, y)| x + y).collect(),
        }
    }
}

impl ConvexBody for AaBox {
    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn support(&self, u: &[f64]) -> f64 {
        box_support(&self.lo, &self.hi, u)
    }

    fn perimeter(&self) -> f64 {
        self.surface()
    }

    fn diameter(&self) -> f64 {
        self.lengths().iter().map(|l| l * l).sum::<f64>().sqrt()
    }
}
