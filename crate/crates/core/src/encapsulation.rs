//! Encapsulation of an inner window `W'` by the zero cell inside `W`.
//!
//! `W'` is encapsulated at time `t` when the zero cell `C_t` satisfies
//! `W' ⊆ C_t ⊂ Int(W)`. The sufficient event used for the lower bound asks
//! that every band `G'_a` of hyperplanes separating `W'` from the facet `a`
//! of `W` is hit before any hyperplane hits `W'`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StitError};
use crate::geometry::{separates, ConvexBody, Direction, Hyperplane, Polytope, EPS, UNIT_TOL};
use crate::measure::{Directional, DrivingMeasure};
use crate::rng::RandomStream;
use crate::stit::TimedHyperplane;
use crate::tessellation::Tessellation;

/// Set of oriented normal directions of a band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DirectionSet {
    Atom {
        u: Direction,
    },
    /// Planar directions whose angle is within `half_width` of `center`.
    Arc {
        center: f64,
        half_width: f64,
    },
}

/// `{ H(u, d) : u ∈ directions, band_lo < d < band_hi }` for the facet `facet`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub facet: usize,
    pub directions: DirectionSet,
    pub d_lo: f64,
    pub d_hi: f64,
    /// `Λ(G'_a)`.
    pub mass: f64,
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let x = (a - b).rem_euclid(2.0 * PI);
    x.min(2.0 * PI - x)
}

impl Band {
    fn contains_oriented(&self, u: &[f64], d: f64) -> bool {
        if !(self.d_lo < d && d < self.d_hi) {
            return false;
        }
        match &self.directions {
            DirectionSet::Atom { u: a } => {
                let c: f64 = a.as_slice().iter().zip(u).map(|(x, y)| x * y).sum();
                c >= 1.0 - UNIT_TOL
            }
            DirectionSet::Arc { center, half_width } => {
                u.len() == 2 && angle_gap(u[1].atan2(u[0]), *center) <= *half_width
            }
        }
    }

    /// `H ∈ G'_a`, checking both orientations of `H`.
    pub fn contains(&self, h: &Hyperplane) -> bool {
        let u = h.normal().as_slice();
        let neg: Vec<f64> = u.iter().map(|c| -c).collect();
        self.contains_oriented(u, h.offset()) || self.contains_oriented(&neg, -h.offset())
    }

    /// A hyperplane from the band, uniform in angle and offset.
    pub fn sample(&self, rng: &mut RandomStream) -> Hyperplane {
        let d = rng.uniform_in(self.d_lo, self.d_hi);
        let u = match &self.directions {
            DirectionSet::Atom { u } => u.clone(),
            DirectionSet::Arc { center, half_width } => {
                Direction::from_angle(center + rng.uniform_in(-half_width, *half_width))
            }
        };
        Hyperplane::new(u, d)
    }
}

/// Parameters of the closed-form lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundParams {
    /// `Λ([W'])`.
    pub lambda_inner: f64,
    /// `Λ(G'_a)`, one per band.
    pub band_masses: Vec<f64>,
}

impl BoundParams {
    pub fn new(lambda_inner: f64, band_masses: Vec<f64>) -> Result<Self> {
        let p = Self {
            lambda_inner,
            band_masses,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x > 0.0 && x.is_finite();
        if !ok(self.lambda_inner) || self.band_masses.is_empty() || !self.band_masses.iter().all(|m| ok(*m)) {
            return Err(StitError::InvalidParameter(
                "bound parameters must be positive and finite".into(),
            ));
        }
        Ok(())
    }

    pub fn q(&self) -> usize {
        self.band_masses.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncapsulationProblem {
    pub inner: Polytope,
    pub outer: Polytope,
    pub measure: DrivingMeasure,
    pub bands: Vec<Band>,
}

/// Tuning of [`build_window`]; facets sit at `h_{W'}(u_a) + offset`, bands
/// cover `h_{W'}(u_a) + band_lo < d < h_{W'}(u_a) + band_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowKnobs {
    pub offset: f64,
    pub band_lo: f64,
    pub band_hi: f64,
    /// Angular half-width of the arcs used for isotropic measures.
    pub arc_half_width: f64,
}

impl Default for WindowKnobs {
    fn default() -> Self {
        Self {
            offset: 3.0,
            band_lo: 1.0,
            band_hi: 2.0,
            arc_half_width: PI / 16.0,
        }
    }
}

impl EncapsulationProblem {
    pub fn bound_params(&self) -> Result<BoundParams> {
        BoundParams::new(
            self.measure.hitting(&self.inner)?,
            self.bands.iter().map(|b| b.mass).collect(),
        )
    }

    /// Samples `per_band` hyperplanes from every band and checks that each
    /// separates `W'` from its facet and lies in no other band.
    pub fn check(&self, per_band: usize, rng: &mut RandomStream) -> Result<()> {
        let facets = self.outer.facets();
        for (a, band) in self.bands.iter().enumerate() {
            let facet = facets
                .get(band.facet)
                .ok_or_else(|| StitError::InvalidParameter(format!("band {a} names a missing facet")))?;
            for _ in 0..per_band {
                let h = band.sample(rng);
                if !separates(&h, &self.inner, facet) {
                    return Err(StitError::InvalidParameter(format!(
                        "band {a} holds a non-separating hyperplane"
                    )));
                }
                if self
                    .bands
                    .iter()
                    .enumerate()
                    .any(|(b, other)| b != a && other.contains(&h))
                {
                    return Err(StitError::InvalidParameter(format!("band {a} overlaps another band")));
                }
            }
        }
        Ok(())
    }

    /// Index of the first band containing `h`.
    pub fn band_of(&self, h: &Hyperplane) -> Option<usize> {
        self.bands.iter().position(|b| b.contains(h))
    }
}

/// `W' ⊆ C ⊂ Int(W)` for the zero cell `C` of `tess`.
pub fn is_encapsulated(tess: &Tessellation, inner: &Polytope, outer: &Polytope) -> Result<bool> {
    Ok(zero_cell_encapsulates(tess.zero_cell()?, inner, outer))
}

pub fn zero_cell_encapsulates(zero: &Polytope, inner: &Polytope, outer: &Polytope) -> bool {
    zero.contains(inner, false) && outer.contains(zero, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "time", rename_all = "snake_case")]
pub enum EncapsulationTime {
    At(f64),
    /// `W'` was cut before it was encapsulated; the zero cell only shrinks,
    /// so encapsulation can no longer happen.
    Never,
    /// Not encapsulated up to the simulated horizon.
    NotWithin(f64),
}

impl EncapsulationTime {
    /// `aS <= t`.
    pub fn by(&self, t: f64) -> bool {
        matches!(self, EncapsulationTime::At(s) if *s <= t)
    }
}

/// Scans the zero cell lineage `(birth time, cell)` for the first time the
/// encapsulation predicate holds.
pub fn encapsulation_time(
    lineage: &[(f64, &Polytope)],
    inner: &Polytope,
    outer: &Polytope,
    horizon: f64,
) -> EncapsulationTime {
    for (birth, cell) in lineage {
        if !cell.contains(inner, false) {
            return EncapsulationTime::Never;
        }
        if outer.contains(cell, true) {
            return EncapsulationTime::At(*birth);
        }
    }
    EncapsulationTime::NotWithin(horizon)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "time", rename_all = "snake_case")]
pub enum SufficientEvent {
    OccurredBy(f64),
    NotOccurred,
}

impl SufficientEvent {
    pub fn occurred(&self) -> bool {
        matches!(self, SufficientEvent::OccurredBy(_))
    }
}

fn decide(sigma_inner: f64, band_times: impl Iterator<Item = f64>, t: f64) -> SufficientEvent {
    let m = band_times.fold(0.0, f64::max);
    if m <= sigma_inner.min(t) && m.is_finite() {
        SufficientEvent::OccurredBy(m)
    } else {
        SufficientEvent::NotOccurred
    }
}

/// Independent exponential clocks `σ' ~ Exp(Λ([W']))`, `σ_a ~ Exp(Λ(G'_a))`;
/// the event is `max_a σ_a <= min(σ', t)`.
pub fn sufficient_event_time(params: &BoundParams, t: f64, rng: &mut RandomStream) -> SufficientEvent {
    let sigma_inner = rng.exponential(params.lambda_inner);
    let sigmas: Vec<f64> = params.band_masses.iter().map(|m| rng.exponential(*m)).collect();
    if t <= 0.0 {
        return SufficientEvent::NotOccurred;
    }
    decide(sigma_inner, sigmas.into_iter(), t)
}

/// The same event read off a recorded rain of hyperplanes on `W` (time
/// ordered), so that it is coupled with the tessellation built from it.
pub fn sufficient_event_from_rain(problem: &EncapsulationProblem, rain: &[TimedHyperplane], t: f64) -> SufficientEvent {
    let mut sigma_inner = f64::INFINITY;
    let mut sigmas = vec![f64::INFINITY; problem.bands.len()];
    for drop in rain {
        if drop.time > t {
            break;
        }
        if sigma_inner.is_infinite() && crate::geometry::hits(&drop.plane, &problem.inner) {
            sigma_inner = drop.time;
        }
        for (a, band) in problem.bands.iter().enumerate() {
            if sigmas[a].is_infinite() && band.contains(&drop.plane) {
                sigmas[a] = drop.time;
            }
        }
    }
    if t <= 0.0 {
        return SufficientEvent::NotOccurred;
    }
    decide(sigma_inner, sigmas.into_iter(), t)
}

const EXACT_MAX_Q: usize = 20;

/// `P(max_a σ_a <= min(σ', t))`:
/// `e^{-tΛ'} Π_a (1 - e^{-t m_a}) + ∫_0^t Λ' e^{-xΛ'} Π_a (1 - e^{-x m_a}) dx`.
pub fn lower_bound(t: f64, p: &BoundParams) -> f64 {
    if !(t > 0.0) {
        return 0.0;
    }
    let l = p.lambda_inner;
    let closed = if t.is_finite() {
        (-t * l).exp() * p.band_masses.iter().map(|m| -(-t * m).exp_m1()).product::<f64>()
    } else {
        0.0
    };
    let integral = if p.q() <= EXACT_MAX_Q {
        exact_integral(t, p)
    } else {
        quadrature_integral(t, p)
    };
    (closed + integral).clamp(0.0, 1.0)
}

/// Expands the product into `2^q` signed exponentials.
fn exact_integral(t: f64, p: &BoundParams) -> f64 {
    let l = p.lambda_inner;
    let q = p.q();
    let mut sum = 0.0;
    for mask in 0u32..(1u32 << q) {
        let ms: f64 = (0..q).filter(|a| mask >> a & 1 == 1).map(|a| p.band_masses[a]).sum();
        let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let rate = l + ms;
        let tail = if t.is_finite() { -(-t * rate).exp_m1() } else { 1.0 };
        sum += sign * l / rate * tail;
    }
    sum
}

fn quadrature_integral(t: f64, p: &BoundParams) -> f64 {
    let l = p.lambda_inner;
    let f = |x: f64| l * (-x * l).exp() * p.band_masses.iter().map(|m| -(-x * m).exp_m1()).product::<f64>();
    // beyond 45 / Λ' the integrand is below e^{-45} relative to its scale
    let upper = t.min(45.0 / l);
    adaptive_simpson(&f, 0.0, upper, 1e-14, 50)
}

/// Adaptive Simpson quadrature.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, depth)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(StitError::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {eps}"
        )));
    }
    Ok(())
}

/// The supremum of times with `e^{-t Λ([W'])} > sqrt(1 - ε)`.
pub fn t_star(eps: f64, lambda_inner: f64) -> Result<f64> {
    check_eps(eps)?;
    if !(lambda_inner > 0.0 && lambda_inner.is_finite()) {
        return Err(StitError::InvalidParameter("lambda_inner must be positive".into()));
    }
    Ok(-0.5 * (1.0 - eps).ln() / lambda_inner)
}

/// Smallest `r >= 1` (up to a relative margin) with
/// `(1 - e^{-s r L})^{2l} > sqrt(1 - ε)`.
pub fn r_of_s(s: f64, eps: f64, l_min: f64, dim: usize) -> Result<f64> {
    check_eps(eps)?;
    if !(s > 0.0 && l_min > 0.0 && dim >= 1) {
        return Err(StitError::InvalidParameter(
            "s and L must be positive, dimension at least 1".into(),
        ));
    }
    let target = (1.0 - eps).powf(1.0 / (4.0 * dim as f64));
    let r = -(-target).ln_1p() / (s * l_min);
    Ok(if r >= 1.0 { r * (1.0 + 1e-9) } else { 1.0 })
}

fn check_inner(inner: &Polytope, measure: &DrivingMeasure) -> Result<()> {
    if inner.dim() != measure.dim() {
        return Err(StitError::RegimeMismatch(
            "inner window and measure differ in dimension".into(),
        ));
    }
    if !inner.contains_point(&vec![0.0; inner.dim()], true) {
        return Err(StitError::InvalidParameter(
            "the origin must lie inside the inner window".into(),
        ));
    }
    Ok(())
}

/// Builds `W` and the bands for `W'` and `Λ`.
///
/// Axis measures use `u_a = ±e_c`; other planar discrete measures use the
/// two heaviest axes; the isotropic measure uses arcs around `±e_1, ±e_2`.
pub fn build_window(inner: &Polytope, measure: &DrivingMeasure, knobs: WindowKnobs) -> Result<EncapsulationProblem> {
    check_inner(inner, measure)?;
    if !(0.0 < knobs.band_lo && knobs.band_lo < knobs.band_hi && knobs.band_hi < knobs.offset) {
        return Err(StitError::InvalidParameter(
            "need 0 < band_lo < band_hi < offset".into(),
        ));
    }
    let dim = inner.dim();
    let axes: Vec<Direction> = match measure.directional() {
        Directional::Discrete { axes } if measure.is_axis_parallel() => {
            if axes.len() != dim {
                return Err(StitError::UnsupportedSupport);
            }
            (0..dim).map(|c| Direction::axis(dim, c)).collect()
        }
        Directional::Discrete { axes } => {
            let mut sorted: Vec<_> = axes.iter().enumerate().collect();
            sorted.sort_by(|(i, a), (j, b)| b.w.total_cmp(&a.w).then(i.cmp(j)));
            let first = sorted[0].1.u.clone();
            let second = sorted
                .iter()
                .skip(1)
                .map(|(_, a)| a.u.clone())
                .find(|u| crate::geometry::dot(u.as_slice(), first.as_slice()).abs() < 1.0 - 1e-9)
                .ok_or(StitError::UnsupportedSupport)?;
            vec![first, second]
        }
        Directional::Isotropic2d => vec![Direction::axis(2, 0), Direction::axis(2, 1)],
    };
    let dirs: Vec<Direction> = axes.iter().flat_map(|u| [u.clone(), u.negated()]).collect();
    let h: Vec<f64> = dirs.iter().map(|u| inner.support(u.as_slice())).collect();
    let outer = if measure.is_axis_parallel() || matches!(measure.directional(), Directional::Isotropic2d) {
        let hi: Vec<f64> = (0..dim).map(|c| h[2 * c] + knobs.offset).collect();
        let lo: Vec<f64> = (0..dim).map(|c| -(h[2 * c + 1] + knobs.offset)).collect();
        Polytope::aabox(&lo, &hi)?
    } else {
        // clip a box large enough to contain the parallelogram
        let sin = {
            let (a, b) = (axes[0].as_slice(), axes[1].as_slice());
            (a[0] * b[1] - a[1] * b[0]).abs()
        };
        let reach = h.iter().fold(0.0f64, |m, x| m.max(*x)) + knobs.offset;
        let big = 4.0 * reach / sin;
        let mut acc = Polytope::cube(2, big);
        for (u, hu) in dirs.iter().zip(&h) {
            let plane = Hyperplane::new(u.clone(), hu + knobs.offset);
            // offsets are positive, so the origin side is Plus
            acc = acc
                .clip_lenient(&plane.half_space(crate::geometry::Side::Plus))
                .ok_or_else(|| StitError::InvalidPolytope("empty window".into()))?;
        }
        acc
    };
    let ineqs = outer.inequalities();
    let mut bands = Vec::with_capacity(dirs.len());
    for (u, hu) in dirs.iter().zip(&h) {
        let facet = ineqs
            .iter()
            .position(|(n, _)| crate::geometry::dot(n, u.as_slice()) >= 1.0 - 1e-9)
            .ok_or_else(|| StitError::InvalidPolytope("window lacks a facet for a band".into()))?;
        let (d_lo, d_hi) = (hu + knobs.band_lo, hu + knobs.band_hi);
        let (directions, theta) = match measure.directional() {
            Directional::Isotropic2d => {
                let hw = knobs.arc_half_width;
                if !(hw > 0.0 && hw < PI / 4.0) {
                    return Err(StitError::InvalidParameter(
                        "arc half-width must lie in (0, π/4)".into(),
                    ));
                }
                (
                    DirectionSet::Arc {
                        center: u.angle(),
                        half_width: hw,
                    },
                    2.0 * hw / PI,
                )
            }
            Directional::Discrete { .. } => (
                DirectionSet::Atom { u: u.clone() },
                measure.atom_mass(u) / measure.gamma(),
            ),
        };
        bands.push(Band {
            facet,
            directions,
            d_lo,
            d_hi,
            mass: measure.gamma() * theta * (d_hi - d_lo),
        });
    }
    let problem = EncapsulationProblem {
        inner: inner.clone(),
        outer,
        measure: measure.clone(),
        bands,
    };
    check_arcs(&problem)?;
    Ok(problem)
}

/// For arcs, every direction in the arc must keep the band between `W'` and
/// the facet. Checked on a fine angular grid.
fn check_arcs(problem: &EncapsulationProblem) -> Result<()> {
    let facets = problem.outer.facets();
    for band in &problem.bands {
        if let DirectionSet::Arc { center, half_width } = band.directions {
            let facet = &facets[band.facet];
            for k in 0..=256 {
                let phi = center - half_width + 2.0 * half_width * k as f64 / 256.0;
                let u = Direction::from_angle(phi);
                let inner_reach = problem.inner.support(u.as_slice());
                let neg = u.negated();
                let facet_near = -facet.support(neg.as_slice());
                if !(inner_reach < band.d_lo - EPS && facet_near > band.d_hi + EPS) {
                    return Err(StitError::InvalidParameter(
                        "arc too wide for the window; increase the offset or narrow the arc".into(),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// `W' = [-α, α]^l`, `W = [-β, β]^l` with the full separating sets `G_a` as
/// bands, for a measure on the coordinate axes.
pub fn axis_boxes(alpha: f64, beta: f64, measure: &DrivingMeasure) -> Result<EncapsulationProblem> {
    if !measure.is_axis_parallel() {
        return Err(StitError::RegimeMismatch(
            "axis boxes need a measure on the coordinate axes".into(),
        ));
    }
    if !(0.0 < alpha && alpha < beta) {
        return Err(StitError::InvalidParameter("need 0 < alpha < beta".into()));
    }
    let dim = measure.dim();
    let outer = Polytope::cube(dim, beta);
    let mut bands = Vec::with_capacity(2 * dim);
    for c in 0..dim {
        for u in [Direction::axis(dim, c), Direction::axis(dim, c).negated()] {
            let mass = measure.atom_mass(&u) * (beta - alpha);
            bands.push(Band {
                facet: bands.len(),
                directions: DirectionSet::Atom { u },
                d_lo: alpha,
                d_hi: beta,
                mass,
            });
        }
    }
    Ok(EncapsulationProblem {
        inner: Polytope::cube(dim, alpha),
        outer,
        measure: measure.clone(),
        bands,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stit::{simulate, simulate_zero_cell, Method};
    use proptest::prelude::*;

    fn four_unit() -> BoundParams {
        BoundParams::new(4.0, vec![1.0; 4]).unwrap()
    }

    /// Independent oracle: composite Simpson on a fine uniform grid.
    fn simpson_oracle(t: f64, p: &BoundParams) -> f64 {
        let l = p.lambda_inner;
        let f = |x: f64| l * (-x * l).exp() * p.band_masses.iter().map(|m| 1.0 - (-x * m).exp()).product::<f64>();
        let n = 20_000;
        let h = t / n as f64;
        let mut s = f(0.0) + f(t);
        for k in 1..n {
            s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        let closed = (-t * l).exp() * p.band_masses.iter().map(|m| 1.0 - (-t * m).exp()).product::<f64>();
        closed + s * h / 3.0
    }

    #[test]
    fn bound_examples() {
        let p = four_unit();
        assert_eq!(lower_bound(0.0, &p), 0.0);
        // Σ_k C(4,k) (-1)^k 4/(4+k) = 1/70
        let series: f64 = (0..=4)
            .map(|k| {
                let binom = [1.0, 4.0, 6.0, 4.0, 1.0][k];
                binom * (-1f64).powi(k as i32) * 4.0 / (4.0 + k as f64)
            })
            .sum();
        assert!((series - 1.0 / 70.0).abs() < 1e-15);
        assert!((lower_bound(f64::INFINITY, &p) - 1.0 / 70.0).abs() < 1e-12);
        assert!((lower_bound(1e6, &p) - 1.0 / 70.0).abs() < 1e-12);
        let v = lower_bound(1.0, &p);
        let floor = (-4.0f64).exp() * (1.0 - (-1.0f64).exp()).powi(4);
        assert!(floor <= v && v <= 1.0 / 70.0);
        assert!((v - simpson_oracle(1.0, &p)).abs() < 1e-10);
    }

    #[test]
    fn quadrature_branch_matches_expansion() {
        let p = BoundParams::new(2.0, vec![0.3, 0.7, 1.1]).unwrap();
        for t in [0.1, 0.5, 2.0, 10.0] {
            let closed = (-t * 2.0f64).exp() * p.band_masses.iter().map(|m| 1.0 - (-t * m).exp()).product::<f64>();
            let a = closed + exact_integral(t, &p);
            let b = closed + quadrature_integral(t, &p);
            assert!((a - b).abs() < 1e-11, "{t}: {a} {b}");
        }
        let many = BoundParams::new(1.0, vec![5.0; 24]).unwrap();
        let v = lower_bound(3.0, &many);
        assert!((v - simpson_oracle(3.0, &many)).abs() < 1e-9);
    }

    #[test]
    fn sufficient_event_limit() {
        let p = four_unit();
        let mut rng = RandomStream::new(3, 0);
        let n = 200_000;
        let hits = (0..n)
            .filter(|_| sufficient_event_time(&p, f64::INFINITY, &mut rng).occurred())
            .count();
        let q = 1.0 / 70.0;
        let sigma = (q * (1.0 - q) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - q).abs() < 4.0 * sigma);
        assert!(!sufficient_event_time(&p, 0.0, &mut rng).occurred());
    }

    #[test]
    fn t_star_and_r_of_s() {
        let ts = t_star(0.19, 4.0).unwrap();
        assert!((ts - 0.026341).abs() < 1e-6);
        assert!(t_star(1e-12, 4.0).unwrap() < 1e-11);
        assert!((-0.9 * ts * 4.0f64).exp() > 0.9);
        let r = r_of_s(0.1, 0.19, 1.0, 2).unwrap();
        assert!((r - 36.50).abs() < 0.01, "{r}");
        assert!((1.0 - (-0.1 * r).exp()).powi(4) > 0.9);
        assert_eq!(r_of_s(1e6, 0.19, 1.0, 2).unwrap(), 1.0);
        assert!(t_star(1.0, 4.0).is_err());
    }

    #[test]
    fn build_window_axis() {
        let m = DrivingMeasure::axis_parallel(&[1.0, 1.0]).unwrap();
        let p = build_window(&Polytope::cube(2, 1.0), &m, WindowKnobs::default()).unwrap();
        assert_eq!(p.outer, Polytope::cube(2, 4.0));
        assert_eq!(p.bands.len(), 4);
        for b in &p.bands {
            assert_eq!((b.d_lo, b.d_hi, b.mass), (2.0, 3.0, 1.0));
        }
        p.check(100, &mut RandomStream::new(0, 0)).unwrap();
        let m3 = DrivingMeasure::axis_parallel(&[1.0, 2.0, 3.0]).unwrap();
        let p3 = build_window(&Polytope::cube(3, 0.5), &m3, WindowKnobs::default()).unwrap();
        assert_eq!(p3.bound_params().unwrap().q(), 6);
        p3.check(100, &mut RandomStream::new(0, 1)).unwrap();
    }

    #[test]
    fn build_window_isotropic() {
        let m = DrivingMeasure::isotropic(1.0).unwrap();
        let p = build_window(&Polytope::cube(2, 1.0), &m, WindowKnobs::default()).unwrap();
        for b in &p.bands {
            assert!((b.mass - 0.125).abs() < 1e-15);
        }
        p.check(100, &mut RandomStream::new(1, 0)).unwrap();
        // arc mass against the empirical share of Λ^W draws falling in the band
        let mut rng = RandomStream::new(2, 0);
        let lw = m.hitting(&p.outer).unwrap();
        let n = 100_000;
        let inside = (0..n)
            .filter(|_| p.bands[0].contains(&m.sample_hitting(&p.outer, &mut rng).unwrap()))
            .count();
        let q = 0.125 / lw;
        let sigma = (q * (1.0 - q) / n as f64).sqrt();
        assert!((inside as f64 / n as f64 - q).abs() < 4.0 * sigma);
    }

    #[test]
    fn build_window_oblique_discrete() {
        let axes = vec![
            crate::measure::Axis {
                u: Direction::from_angle(0.3),
                w: 0.5,
            },
            crate::measure::Axis {
                u: Direction::from_angle(1.5),
                w: 0.3,
            },
            crate::measure::Axis {
                u: Direction::from_angle(2.4),
                w: 0.2,
            },
        ];
        let m = DrivingMeasure::new(2.0, Directional::Discrete { axes }).unwrap();
        let p = build_window(&Polytope::cube(2, 1.0), &m, WindowKnobs::default()).unwrap();
        assert_eq!(p.bands.len(), 4);
        assert_eq!(p.outer.vertices_2d().unwrap().len(), 4);
        p.check(100, &mut RandomStream::new(3, 0)).unwrap();
        assert!((p.bands[0].mass - 1.0).abs() < 1e-12);
        assert!((p.bands[2].mass - 0.6).abs() < 1e-12);
    }

    #[test]
    fn axis_boxes_masses() {
        let m = DrivingMeasure::axis_parallel(&[3.0, 1.0]).unwrap();
        let p = axis_boxes(1.0, 2.0, &m).unwrap();
        let masses: Vec<f64> = p.bands.iter().map(|b| b.mass).collect();
        assert_eq!(masses, vec![3.0, 3.0, 1.0, 1.0]);
        p.check(100, &mut RandomStream::new(4, 0)).unwrap();
        for (a, b) in p.bands.iter().enumerate() {
            assert!((m.facet_separating(&p.inner, &p.outer, b.facet).unwrap() - masses[a]).abs() < 1e-12);
        }
    }

    #[test]
    fn encapsulation_predicate_examples() {
        let inner = Polytope::cube(2, 1.0);
        let outer = Polytope::cube(2, 2.0);
        let t = Tessellation::trivial(outer.clone());
        assert!(!is_encapsulated(&t, &inner, &outer).unwrap());
        assert!(zero_cell_encapsulates(&inner, &inner, &outer));
        let notched = Polytope::polygon(vec![[-1.0, -1.0], [0.9, -1.0], [1.0, -0.9], [1.0, 1.0], [-1.0, 1.0]]).unwrap();
        assert!(!zero_cell_encapsulates(&notched, &inner, &outer));
    }

    #[test]
    fn encapsulation_needs_four_zero_cell_cuts() {
        let m = DrivingMeasure::axis_parallel(&[1.0, 1.0]).unwrap();
        let p = axis_boxes(1.0, 2.0, &m).unwrap();
        for seed in 0..200 {
            let tree = simulate(&m, &p.outer, 3.0, &mut RandomStream::new(seed, 0), Method::Direct).unwrap();
            let lineage = tree.zero_cells().unwrap();
            match encapsulation_time(&lineage, &p.inner, &p.outer, 3.0) {
                EncapsulationTime::At(s) => {
                    let k = lineage.iter().position(|(b, _)| *b == s).unwrap();
                    assert!(k >= 4);
                }
                EncapsulationTime::NotWithin(h) => assert_eq!(h, 3.0),
                EncapsulationTime::Never => {}
            }
        }
    }

    #[test]
    fn coupled_inclusion_on_rejection_paths() {
        let m = DrivingMeasure::isotropic(1.0).unwrap();
        let inner = Polytope::cube(2, 0.25);
        let p = build_window(&inner, &m, WindowKnobs::default()).unwrap();
        let mut occurred = 0;
        for seed in 0..500 {
            let path =
                simulate_zero_cell(&m, &p.outer, 20.0, &mut RandomStream::new(seed, 0), Method::Rejection).unwrap();
            let ev = sufficient_event_from_rain(&p, path.rain.as_ref().unwrap(), 20.0);
            let at = encapsulation_time(&path.zero_cells(), &p.inner, &p.outer, 20.0);
            if let SufficientEvent::OccurredBy(mt) = ev {
                occurred += 1;
                assert!(at.by(mt), "{ev:?} {at:?}");
            }
        }
        assert!(occurred > 0);
    }

    proptest! {
        #[test]
        fn bound_is_monotone(l in 0.1f64..10.0, ms in proptest::collection::vec(0.05f64..5.0, 1..6), t in 0.0f64..5.0, dt in 0.0f64..2.0, bump in 0.0f64..1.0) {
            let p = BoundParams::new(l, ms.clone()).unwrap();
            let a = lower_bound(t, &p);
            let b = lower_bound(t + dt, &p);
            prop_assert!(b >= a - 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
            let mut ms2 = ms;
            ms2[0] += bump;
            let p2 = BoundParams::new(l, ms2).unwrap();
            prop_assert!(lower_bound(t, &p2) >= a - 1e-12);
        }
    }
}
