//! Encapsulation of `W'` by the zero cell inside `W`: the exact law in the
//! axis-parallel case, the general lower bound, the coupling inclusion and
//! conditional independence given early encapsulation.

use serde::{Deserialize, Serialize};
use stit_core::encapsulation::{
    axis_boxes, build_window, encapsulation_time, lower_bound, sufficient_event_from_rain, t_star, BoundParams,
    EncapsulationProblem, EncapsulationTime, WindowKnobs,
};
use stit_core::geometry::Segment;
use stit_core::stit::simulate_zero_cell;
use stit_core::{simulate, DrivingMeasure, Method, Polytope};

use super::{lperp, square, Ctx, Experiment};
use crate::error::{HarnessError, Result};
use crate::report::{Outcome, Row};
use crate::runner::{replicate, tag};
use crate::stats::{cov_gap, EstimateWithCI};

/// `lim_{t→∞} P(max_a σ_a <= σ')`, by inclusion–exclusion over the bands:
/// `Σ_S (-1)^{|S|} Λ' / (Λ' + Σ_{a∈S} m_a)`.
pub fn encapsulation_limit(p: &BoundParams) -> f64 {
    let q = p.band_masses.len();
    (0u64..1 << q)
        .map(|mask| {
            let m: f64 = (0..q).filter(|a| mask >> a & 1 == 1).map(|a| p.band_masses[a]).sum();
            let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            sign * p.lambda_inner / (p.lambda_inner + m)
        })
        .sum()
}

fn sorted_grid(grid: &[f64]) -> Result<Vec<f64>> {
    let mut g = grid.to_vec();
    g.sort_by(f64::total_cmp);
    match g.last() {
        Some(t) if *t > 0.0 && g.iter().all(|x| *x >= 0.0 && x.is_finite()) => Ok(g),
        _ => Err(HarnessError::Config(
            "time grid must be non-empty, finite, non-negative with a positive maximum".into(),
        )),
    }
}

/// Encapsulation time of one replicate, from a full tree or the zero cell path.
fn sample_encapsulation(
    problem: &EncapsulationProblem,
    horizon: f64,
    full_tree: bool,
    rng: &mut stit_core::RandomStream,
) -> Result<EncapsulationTime> {
    let (inner, outer) = (&problem.inner, &problem.outer);
    Ok(if full_tree {
        let tree = simulate(&problem.measure, outer, horizon, rng, Method::Direct)?;
        encapsulation_time(&tree.zero_cells()?, inner, outer, horizon)
    } else {
        let path = simulate_zero_cell(&problem.measure, outer, horizon, rng, Method::Direct)?;
        encapsulation_time(&path.zero_cells(), inner, outer, horizon)
    })
}

fn frequencies(times: &[EncapsulationTime], grid: &[f64], seed: u64) -> Vec<EstimateWithCI> {
    grid.iter()
        .map(|t| EstimateWithCI::from_count(times.iter().filter(|a| a.by(*t)).count(), times.len(), seed))
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EncapsulationEquality {
    pub measure: DrivingMeasure,
    pub alpha: f64,
    pub beta: f64,
    pub t_grid: Vec<f64>,
    pub n: usize,
    /// Simulate whole tessellations rather than the zero cell alone.
    pub full_tree: bool,
}

impl Default for EncapsulationEquality {
    fn default() -> Self {
        Self {
            measure: lperp(),
            alpha: 1.0,
            beta: 2.0,
            t_grid: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            n: 20_000,
            full_tree: true,
        }
    }
}

impl Experiment for EncapsulationEquality {
    const NAME: &'static str = "encapsulation-equality";

    fn run(&self, ctx: &Ctx) -> Result<Outcome> {
        let problem = axis_boxes(self.alpha, self.beta, &self.measure)?;
        let params = problem.bound_params()?;
        let grid = sorted_grid(&self.t_grid)?;
        let horizon = *grid.last().expect("non-empty");
        let times = replicate(ctx.n(self.n), ctx.seed, tag(Self::NAME), |_, rng| {
            sample_encapsulation(&problem, horizon, self.full_tree, rng)
        })?;
        let mut out = Outcome::default();
        let estimates = frequencies(&times, &grid, ctx.seed);
        for (t, e) in grid.iter().zip(&estimates) {
            out.push(Row::binomial(
                "p_encapsulated",
                Some(*t),
                e,
                lower_bound(*t, &params),
                4.0,
            ));
        }
        let last = estimates.last().expect("non-empty");
        out.push(Row::binomial(
            "limit",
            Some(horizon),
            last,
            encapsulation_limit(&params),
            4.0,
        ));
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EncapsulationBound {
    pub measure: DrivingMeasure,
    pub inner: Polytope,
    pub knobs: WindowKnobs,
    pub t_grid: Vec<f64>,
    pub n: usize,
    pub full_tree: bool,
}

impl Default for EncapsulationBound {
    fn default() -> Self {
        Self {
            measure: DrivingMeasure::isotropic(1.0).expect("valid intensity"),
            inner: square(1.0),
            knobs: WindowKnobs::default(),
            t_grid: vec![0.0, 1.0, 2.0, 4.0, 8.0],
            n: 10_000,
            full_tree: false,
        }
    }
}

impl Experiment for EncapsulationBound {
    const NAME: &'static str = "encapsulation-bound";

    fn run(&self, ctx: &Ctx) -> Result<Outcome> {
        let problem = build_window(&self.inner, &self.measure, self.knobs)?;
        let params = problem.bound_params()?;
        let grid = sorted_grid(&self.t_grid)?;
        let horizon = *grid.last().expect("non-empty");
        let times = replicate(ctx.n(self.n), ctx.seed, tag(Self::NAME), |_, rng| {
            sample_encapsulation(&problem, horizon, self.full_tree, rng)
        })?;
        let mut out = Outcome::default();
        out.push(Row::info("window_volume", None, 0, problem.outer.volume()));
        for (t, e) in grid.iter().zip(frequencies(&times, &grid, ctx.seed)) {
            let bound = lower_bound(*t, &params);
            let sigma = e.sigma_at(bound);
            out.push(
                Row::estimate("p_encapsulated", Some(*t), &e)
                    .target(bound)
                    .sigma(sigma)
                    .check(e.p_hat >= bound - 4.0 * sigma),
            );
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoupledInclusion {
    /// Axis-parallel case: `W' = [-alpha, alpha]^2`, `W = [-beta, beta]^2`.
    pub axis_measure: DrivingMeasure,
    pub alpha: f64,
    pub beta: f64,
    pub axis_t_grid: Vec<f64>,
    /// Isotropic case on a built window.
    pub iso_measure: DrivingMeasure,
    pub iso_inner: Polytope,
    pub knobs: WindowKnobs,
    pub iso_t_grid: Vec<f64>,
    pub n: usize,
}

impl Default for CoupledInclusion {
    fn default() -> Self {
        Self {
            axis_measure: lperp(),
            alpha: 1.0,
            beta: 2.0,
            axis_t_grid: vec![0.5, 1.0, 2.0, 4.0],
            iso_measure: DrivingMeasure::isotropic(1.0).expect("valid intensity"),
            iso_inner: square(0.25),
            knobs: WindowKnobs::default(),
            iso_t_grid: vec![5.0, 10.0, 20.0, 40.0],
            n: 10_000,
        }
    }
}

/// Per grid point: (sufficient event occurred, encapsulated by t).
type Coupled = Vec<(bool, bool)>;

fn coupled_rows(out: &mut Outcome, case: &str, grid: &[f64], runs: &[Coupled], equality: bool, seed: u64) {
    let n = runs.len();
    for (k, t) in grid.iter().enumerate() {
        let event = runs.iter().filter(|r| r[k].0).count();
        let encapsulated = runs.iter().filter(|r| r[k].1).count();
        let violations = runs.iter().filter(|r| r[k].0 && !r[k].1).count();
        out.push(Row::estimate(
            format!("{case}:sufficient_event"),
            Some(*t),
            &EstimateWithCI::from_count(event, n, seed),
        ));
        out.push(Row::estimate(
            format!("{case}:encapsulated"),
            Some(*t),
            &EstimateWithCI::from_count(encapsulated, n, seed),
        ));
        out.push(
            Row::info(format!("{case}:violations"), Some(*t), n, violations as f64)
                .target(0.0)
                .check(violations == 0),
        );
        if equality {
            let mismatches = runs.iter().filter(|r| r[k].0 != r[k].1).count();
            out.push(
                Row::info(format!("{case}:mismatches"), Some(*t), n, mismatches as f64)
                    .target(0.0)
                    .check(mismatches == 0),
            );
        }
    }
}

impl Experiment for CoupledInclusion {
    const NAME: &'static str = "coupled-inclusion";

    fn run(&self, ctx: &Ctx) -> Result<Outcome> {
        let n = ctx.n(self.n);
        let mut out = Outcome::default();

        let axis = axis_boxes(self.alpha, self.beta, &self.axis_measure)?;
        let grid = sorted_grid(&self.axis_t_grid)?;
        let horizon = *grid.last().expect("non-empty");
        let runs = replicate(n, ctx.seed, tag("coupled-inclusion/axis"), |_, rng| {
            let tree = simulate(&axis.measure, &axis.outer, horizon, rng, Method::Rejection)?;
            let rain = tree.zero_cell_rain()?;
            let a_s = encapsulation_time(&tree.zero_cells()?, &axis.inner, &axis.outer, horizon);
            Ok(grid
                .iter()
                .map(|t| (sufficient_event_from_rain(&axis, &rain, *t).occurred(), a_s.by(*t)))
                .collect())
        })?;
        coupled_rows(&mut out, "axis", &grid, &runs, true, ctx.seed);

        let iso = build_window(&self.iso_inner, &self.iso_measure, self.knobs)?;
        let grid = sorted_grid(&self.iso_t_grid)?;
        let horizon = *grid.last().expect("non-empty");
        let runs = replicate(n, ctx.seed, tag("coupled-inclusion/iso"), |_, rng| {
            let path = simulate_zero_cell(&iso.measure, &iso.outer, horizon, rng, Method::Rejection)?;
            let rain = path.rain.as_deref().unwrap_or_default();
            let a_s = encapsulation_time(&path.zero_cells(), &iso.inner, &iso.outer, horizon);
            Ok(grid
                .iter()
                .map(|t| (sufficient_event_from_rain(&iso, rain, *t).occurred(), a_s.by(*t)))
                .collect())
        })?;
        coupled_rows(&mut out, "isotropic", &grid, &runs, false, ctx.seed);
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CondIndependence {
    pub measure: DrivingMeasure,
    /// `W' = [-alpha, alpha]^2`.
    pub alpha: f64,
    /// `Ŵ = [-beta, beta]^2`, the window that must encapsulate `W'`.
    pub beta: f64,
    /// Half side of the simulation window, which must contain `Ŵ` and the probe.
    pub sim_half: f64,
    pub t: f64,
    pub t2: f64,
    /// Height of the outside probe segment `[-1, 1] × {probe_y}`.
    pub probe_y: f64,
    /// Height of the probe used in the unconditioned contrast.
    pub contrast_y: f64,
    pub n: usize,
    pub min_conditioned: usize,
}

impl Default for CondIndependence {
    fn default() -> Self {
        Self {
            measure: lperp(),
            alpha: 1.0,
            beta: 20.0,
            sim_half: 22.0,
            t: 0.1,
            t2: 0.025,
            probe_y: 21.0,
            contrast_y: 1.5,
            n: 1_000_000,
            min_conditioned: 200,
        }
    }
}

impl Experiment for CondIndependence {
    const NAME: &'static str = "cond-independence";

    fn run(&self, ctx: &Ctx) -> Result<Outcome> {
        if !(0.0 < self.t2 && self.t2 < self.t) {
            return Err(HarnessError::Config("need 0 < t2 < t".into()));
        }
        if !(self.beta < self.probe_y && self.probe_y < self.sim_half) {
            return Err(HarnessError::Config(
                "the probe must lie between the encapsulating and simulation windows".into(),
            ));
        }
        let problem = axis_boxes(self.alpha, self.beta, &self.measure)?;
        let window = square(self.sim_half);
        let probe = Segment::new(&[-1.0, self.probe_y], &[1.0, self.probe_y])?;
        let adjacent = Segment::new(&[-1.0, self.contrast_y], &[1.0, self.contrast_y])?;
        let runs = replicate(ctx.n(self.n), ctx.seed, tag(Self::NAME), |_, rng| {
            let tree = simulate(&problem.measure, &window, self.t, rng, Method::Direct)?;
            let a_s = encapsulation_time(&tree.zero_cells()?, &problem.inner, &problem.outer, self.t);
            let d = tree.body_uncut(&problem.inner, self.t);
            Ok((
                a_s.by(self.t2),
                d,
                tree.body_uncut(&probe, self.t),
                tree.body_uncut(&adjacent, self.t),
            ))
        })?;
        let n = runs.len();
        let conditioned: Vec<(bool, bool)> = runs.iter().filter(|r| r.0).map(|r| (r.1, r.2)).collect();
        let lambda_inner = problem.measure.hitting(&problem.inner)?;
        let mut out = Outcome::default();
        out.push(Row::info("t_star(0.19)", None, 0, t_star(0.19, lambda_inner)?));
        out.push(Row::estimate(
            "conditioning_rate",
            Some(self.t2),
            &EstimateWithCI::from_count(conditioned.len(), n, ctx.seed),
        ));
        if conditioned.len() < self.min_conditioned {
            return Err(HarnessError::TooFewConditioned {
                needed: self.min_conditioned,
                got: conditioned.len(),
            });
        }
        let g = cov_gap(&conditioned);
        out.push(Row::info("conditioned:p_inside_uncut", Some(self.t2), g.n, g.p_d));
        out.push(Row::info("conditioned:p_probe_uncut", Some(self.t2), g.n, g.p_e));
        out.push(
            Row::gap("conditioned:gap", Some(self.t2), &g)
                .target(0.0)
                .check(g.gap.abs() <= 4.0 * g.sigma),
        );
        let pairs: Vec<(bool, bool)> = runs.iter().map(|r| (r.1, r.3)).collect();
        let c = cov_gap(&pairs);
        out.push(Row::gap(
            "contrast:unconditioned_adjacent_gap",
            Some(self.contrast_y),
            &c,
        ));
        out.note("the contrast row uses all replicates without conditioning and a probe next to the inner window");
        Ok(out)
    }
}
