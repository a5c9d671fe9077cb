//! Translation-invariant hyperplane measures `Λ = γ · λ ⊗ θ`.
//!
//! Directions are stored unoriented (one representative per `±u` pair), so
//! the evenness of `θ` holds by construction and `d` ranges over all of ℝ.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StitError};
use crate::geometry::{projection, width, ConvexBody, Direction, Hyperplane, Polytope, UNIT_TOL};
use crate::rng::RandomStream;

/// Number of nodes of the trapezoidal rule on `[0, π)` for isotropic integrals.
pub const ISOTROPIC_NODES: usize = 256;
const SAMPLER_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub u: Direction,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Directional {
    Discrete {
        axes: Vec<Axis>,
    },
    /// Uniform even distribution on the circle.
    Isotropic2d,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct DrivingMeasure {
    gamma: f64,
    directional: Directional,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure {
    gamma: f64,
    directional: Directional,
}

impl TryFrom<RawMeasure> for DrivingMeasure {
    type Error = StitError;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        DrivingMeasure::new(raw.gamma, raw.directional)
    }
}

fn rank(vectors: &[&[f64]]) -> usize {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut r = v.to_vec();
        for b in &basis {
            let p: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
            r.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
        let n = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 {
            basis.push(r.into_iter().map(|x| x / n).collect());
        }
    }
    basis.len()
}

impl DrivingMeasure {
    pub fn new(gamma: f64, directional: Directional) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(StitError::InvalidMeasure(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        let directional = match directional {
            Directional::Isotropic2d => Directional::Isotropic2d,
            Directional::Discrete { axes } => {
                if axes.is_empty() {
                    return Err(StitError::InvalidMeasure("no directions".into()));
                }
                let dim = axes[0].u.dim();
                if axes.iter().any(|a| a.u.dim() != dim) {
                    return Err(StitError::InvalidMeasure("directions of mixed dimension".into()));
                }
                if axes.iter().any(|a| !(a.w > 0.0 && a.w.is_finite())) {
                    return Err(StitError::InvalidMeasure("weights must be positive".into()));
                }
                let total: f64 = axes.iter().map(|a| a.w).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(StitError::InvalidMeasure(format!("weights sum to {total}, not 1")));
                }
                let axes: Vec<Axis> = axes
                    .into_iter()
                    .map(|a| Axis {
                        u: Hyperplane::new(a.u, 0.0).normal().clone(),
                        w: a.w,
                    })
                    .collect();
                for (i, a) in axes.iter().enumerate() {
                    for b in &axes[i + 1..] {
                        let c: f64 = a.u.as_slice().iter().zip(b.u.as_slice()).map(|(x, y)| x * y).sum();
                        if (c.abs() - 1.0).abs() <= UNIT_TOL {
                            return Err(StitError::InvalidMeasure("parallel directions listed twice".into()));
                        }
                    }
                }
                let vs: Vec<&[f64]> = axes.iter().map(|a| a.u.as_slice()).collect();
                if rank(&vs) < dim {
                    return Err(StitError::InvalidMeasure(
                        "directions are concentrated on a great subsphere".into(),
                    ));
                }
                Directional::Discrete { axes }
            }
        };
        Ok(Self { gamma, directional })
    }

    /// `Σ_c g_c δ_c`, hyperplanes orthogonal to the coordinate axes with
    /// `δ_c` giving mass 1 to a unit segment parallel to axis `c`.
    pub fn axis_parallel(g: &[f64]) -> Result<Self> {
        if g.is_empty() || g.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(StitError::InvalidMeasure("axis weights must be positive".into()));
        }
        let total: f64 = g.iter().sum();
        let axes = g
            .iter()
            .enumerate()
            .map(|(c, gc)| Axis {
                u: Direction::axis(g.len(), c),
                w: gc / total,
            })
            .collect();
        Self::new(total, Directional::Discrete { axes })
    }

    pub fn isotropic(gamma: f64) -> Result<Self> {
        Self::new(gamma, Directional::Isotropic2d)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn directional(&self) -> &Directional {
        &self.directional
    }

    pub fn dim(&self) -> usize {
        match &self.directional {
            Directional::Isotropic2d => 2,
            Directional::Discrete { axes } => axes[0].u.dim(),
        }
    }

    /// True when every direction is a coordinate axis (so box cells stay boxes).
    pub fn is_axis_parallel(&self) -> bool {
        match &self.directional {
            Directional::Isotropic2d => false,
            Directional::Discrete { axes } => axes.iter().all(|a| a.u.coordinate_axis().is_some()),
        }
    }

    /// `γ · w_c` for the axis parallel to `u`, zero if `u` is not an atom.
    pub fn atom_mass(&self, u: &Direction) -> f64 {
        match &self.directional {
            Directional::Isotropic2d => 0.0,
            Directional::Discrete { axes } => axes
                .iter()
                .find(|a| {
                    let c: f64 = a.u.as_slice().iter().zip(u.as_slice()).map(|(x, y)| x * y).sum();
                    (c.abs() - 1.0).abs() <= UNIT_TOL
                })
                .map_or(0.0, |a| self.gamma * a.w),
        }
    }

    fn check_dim<B: ConvexBody + ?Sized>(&self, body: &B) -> Result<()> {
        if body.dim() != self.dim() {
            return Err(StitError::RegimeMismatch(format!(
                "measure acts in dimension {}, body has dimension {}",
                self.dim(),
                body.dim()
            )));
        }
        Ok(())
    }

    /// `Λ([B])`, the mass of hyperplanes hitting `body`.
    pub fn hitting<B: ConvexBody + ?Sized>(&self, body: &B) -> Result<f64> {
        self.check_dim(body)?;
        Ok(match &self.directional {
            Directional::Discrete { axes } => self.gamma * axes.iter().map(|a| a.w * width(body, &a.u)).sum::<f64>(),
            // Mean width of a planar convex body is perimeter / π.
            Directional::Isotropic2d => self.gamma * body.perimeter() / PI,
        })
    }

    /// `Λ([A|B])`, the mass of hyperplanes strictly separating `a` and `b`.
    pub fn separating<A, B>(&self, a: &A, b: &B) -> Result<f64>
    where
        A: ConvexBody + ?Sized,
        B: ConvexBody + ?Sized,
    {
        self.check_dim(a)?;
        self.check_dim(b)?;
        let gap = |u: &[f64]| {
            let (alo, ahi) = projection(a, u);
            let (blo, bhi) = projection(b, u);
            (blo - ahi).max(alo - bhi).max(0.0)
        };
        Ok(match &self.directional {
            Directional::Discrete { axes } => self.gamma * axes.iter().map(|x| x.w * gap(x.u.as_slice())).sum::<f64>(),
            Directional::Isotropic2d => {
                let n = ISOTROPIC_NODES;
                let s: f64 = (0..n)
                    .map(|k| {
                        let phi = PI * k as f64 / n as f64;
                        gap(&[phi.cos(), phi.sin()])
                    })
                    .sum();
                self.gamma * s / n as f64
            }
        })
    }

    /// `Λ([inner | f_a])` for the facet `a` of `outer` (facet order as in
    /// [`Polytope::facets`]).
    pub fn facet_separating(&self, inner: &Polytope, outer: &Polytope, a: usize) -> Result<f64> {
        let facets = outer.facets();
        let facet = facets
            .get(a)
            .ok_or_else(|| StitError::InvalidParameter(format!("facet index {a} out of range")))?;
        self.separating(inner, facet)
    }

    /// Separating mass for facet `a` of `outer` scaled by `r >= 1`.
    pub fn scaled_facet_separating(&self, inner: &Polytope, outer: &Polytope, a: usize, r: f64) -> Result<f64> {
        if !(r >= 1.0) {
            return Err(StitError::InvalidParameter(format!("scale must be >= 1, got {r}")));
        }
        self.facet_separating(inner, &outer.scale(r)?, a)
    }

    /// One draw from the normalized restriction `Λ^B` of `Λ` to `[B]`.
    pub fn sample_hitting<B: ConvexBody + ?Sized>(&self, body: &B, rng: &mut RandomStream) -> Result<Hyperplane> {
        self.check_dim(body)?;
        match &self.directional {
            Directional::Discrete { axes } => {
                let weights: Vec<f64> = axes.iter().map(|a| a.w * width(body, &a.u)).collect();
                if weights.iter().all(|w| *w <= 0.0) {
                    return Err(StitError::SamplerStall(0));
                }
                let u = &axes[rng.weighted_index(&weights)].u;
                let (lo, hi) = projection(body, u.as_slice());
                Ok(Hyperplane::new(u.clone(), rng.uniform_in(lo, hi)))
            }
            Directional::Isotropic2d => {
                let envelope = body.diameter();
                for _ in 0..SAMPLER_CAP {
                    let u = Direction::from_angle(rng.uniform_in(0.0, PI));
                    let w = width(body, &u);
                    if rng.uniform() * envelope <= w && w > 0.0 {
                        let (lo, hi) = projection(body, u.as_slice());
                        return Ok(Hyperplane::new(u, rng.uniform_in(lo, hi)));
                    }
                }
                Err(StitError::SamplerStall(SAMPLER_CAP))
            }
        }
    }
}
