//! Decay of correlations under translation, with the Poisson hyperplane
//! tessellation as a non-mixing contrast, and the PHT capacity law.

use serde::{Deserialize, Serialize};
use stit_core::geometry::Segment;
use stit_core::pht::{empty_probability, simulate_pht};
use stit_core::{simulate, DrivingMeasure, Method, Polytope};

use super::{lperp, square, Ctx, Experiment};
use crate::error::{HarnessError, Result};
use crate::report::{Outcome, Row};
use crate::runner::{replicate, tag};
use crate::stats::{cov_gap, mc_estimate, CovGap, EstimateWithCI};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Mixing {
    pub measure: DrivingMeasure,
    /// Long window containing every translated segment.
    pub window: Polytope,
    pub t: f64,
    pub rho: f64,
    /// Base segment `[-seg_half, seg_half] × {0}`, translated by `(0, h)`.
    pub seg_half: f64,
    pub h_grid: Vec<f64>,
    pub n: usize,
}

impl Default for Mixing {
    fn default() -> Self {
        Self {
            measure: lperp(),
            window: Polytope::aabox(&[-1.5, -1.0], &[1.5, 33.0]).expect("valid box"),
            t: 1.0,
            rho: 1.0,
            seg_half: 1.0,
            h_grid: vec![2.0, 4.0, 8.0, 16.0, 32.0],
            n: 20_000,
        }
    }
}

/// Per replicate: does a boundary hit the base segment, and each translate.
type Hits = (bool, Vec<bool>);

fn gaps(runs: &[Hits], k: usize) -> CovGap {
    let pairs: Vec<(bool, bool)> = runs.iter().map(|r| (r.0, r.1[k])).collect();
    cov_gap(&pairs)
}

impl Experiment for Mixing {
    const NAME: &'static str = "mixing";

    fn run(&self, ctx: &Ctx) -> Result<Outcome> {
        let n = ctx.n(self.n);
        let mut grid = self.h_grid.clone();
        grid.sort_by(f64::total_cmp);
        let base = Segment::new(&[-self.seg_half, 0.0], &[self.seg_half, 0.0])?;
        let shifted: Vec<Segment> = grid.iter().map(|h| base.translated(&[0.0, *h])).collect();
        if grid.is_empty()
            || !shifted
                .iter()
                .chain([&base])
                .all(|s| self.window.contains_point(&s.a, false) && self.window.contains_point(&s.b, false))
        {
            return Err(HarnessError::Config(
                "every translated segment must lie in the window".into(),
            ));
        }

        let stit = replicate(n, ctx.seed, tag("mixing/stit"), |_, rng| {
            let tree = simulate(&self.measure, &self.window, self.t, rng, Method::Direct)?;
            let hit = |s: &Segment| !tree.body_uncut(s, self.t);
            Ok((hit(&base), shifted.iter().map(hit).collect()))
        })?;
        let pht = replicate(n, ctx.seed, tag("mixing/pht"), |_, rng| {
            let p = simulate_pht(&self.measure, self.rho, &self.window, rng)?;
            Ok((p.hits_body(&base), shifted.iter().map(|s| p.hits_body(s)).collect()))
        })?;

        let mut out = Outcome::default();
        let stit_gaps: Vec<CovGap> = (0..grid.len()).map(|k| gaps(&stit, k)).collect();
        for (h, g) in grid.iter().zip(&stit_gaps) {
            out.push(Row::gap("stit:gap", Some(*h), g));
        }
        let last = stit_gaps.last().expect("non-empty grid");
        out.push(
            Row::info("stit:gap_at_largest_h", grid.last().copied(), n, last.gap.abs())
                .sigma(last.sigma)
                .check(last.gap.abs() <= 2.0 * last.sigma),
        );
        for (k, w) in stit_gaps.windows(2).enumerate() {
            let sigma = w[0].sigma.hypot(w[1].sigma);
            out.push(
                Row::info(
                    "stit:non_increasing",
                    Some(grid[k + 1]),
                    n,
                    w[1].gap.abs() - w[0].gap.abs(),
                )
                .sigma(sigma)
                .check(w[1].gap.abs() <= w[0].gap.abs() + 2.0 * sigma),
            );
        }

        let p_d = 1.0 - empty_probability(&self.measure, self.rho, &base)?;
        let hits = pht.iter().filter(|r| r.0).count();
        out.push(Row::binomial(
            "pht:p_hit",
            None,
            &EstimateWithCI::from_count(hits, n, ctx.seed),
            p_d,
            4.0,
        ));
        let plateau = p_d * (1.0 - p_d);
        for (k, h) in grid.iter().enumerate() {
            let g = gaps(&pht, k);
            out.push(
                Row::gap("pht:gap", Some(*h), &g)
                    .target(plateau)
                    .check((g.gap - plateau).abs() <= 4.0 * g.sigma),
            );
        }
        out.note("mixing is a limit statement; only finite translations are tested");
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhtCapacity {
    pub measure: DrivingMeasure,
    pub rho: f64,
    pub inner: Polytope,
    pub window: Polytope,
    pub n: usize,
}

impl Default for PhtCapacity {
    fn default() -> Self {
        Self {
            measure: lperp(),
            rho: 1.0,
            inner: square(1.0),
            window: square(3.0),
            n: 100_000,
        }
    }
}

impl Experiment for PhtCapacity {
    const NAME: &'static str = "pht-capacity";

    fn run(&self, ctx: &Ctx) -> Result<Outcome> {
        let e = mc_estimate(ctx.n(self.n), ctx.seed, tag(Self::NAME), |rng| {
            Ok(!simulate_pht(&self.measure, self.rho, &self.window, rng)?.hits_body(&self.inner))
        })?;
        let target = empty_probability(&self.measure, self.rho, &self.inner)?;
        let mut out = Outcome::default();
        out.push(Row::binomial("avoidance", Some(self.rho), &e, target, 4.0));
        Ok(out)
    }
}
