//! Distributional laws of the STIT process: lifetimes, method equivalence,
//! consistency, iteration, scaling and the no-jump property.

use serde::{Deserialize, Serialize};
use stit_core::{simulate, DrivingMeasure, Method, Polytope};

use super::{ks_rows, lperp, shape_stats, square, Ctx, Experiment};
use crate::error::Result;
use crate::report::{Outcome, Row};
use crate::runner::{replicate, tag};
use crate::stats::{mc_estimate, EstimateWithCI};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FirstSplit {
    pub measure: DrivingMeasure,
    pub window: Polytope,
    pub t: f64,
    pub n: usize,
    pub method: Method,
}

impl Default for FirstSplit {
    fn default() -> Self {
        Self {
            measure: lperp(),
            window: square(1.0),
            t: 0.25,
            n: 10_000,
            method: Method::Direct,
        }
    }
}

impl Experiment for FirstSplit {
    const NAME: &'static str = "first-split";

    fn run(&self, ctx: &Ctx) -> Result<Outcome> {
        let e = mc_estimate(ctx.n(self.n), ctx.seed, tag(Self::NAME), |rng| {
            Ok(simulate(&self.measure, &self.window, self.t, rng, self.method)?
                .jump_times
                .is_empty())
        })?;
        let target = (-self.t * self.measure.hitting(&self.window)?).exp();
        let mut out = Outcome::default();
        out.push(Row::binomial("survival", Some(self.t), &e, target, 4.0));
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Capacity {
    pub measure: DrivingMeasure,
    pub inner: Polytope,
    pub window: Polytope,
    pub t: f64,
    pub n: usize,
}

impl Default for Capacity {
    fn default() -> Self {
        Self {
            measure: lperp(),
            inner: square(1.0),
            window: square(2.0),
            t: 0.25,
            n: 10_000,
        }
    }
}

impl Experiment for Capacity {
    const NAME: &'static str = "capacity";

    fn run(&self, ctx: &Ctx) -> Result<Outcome> {
        let e = mc_estimate(ctx.n(self.n), ctx.seed, tag(Self::NAME), |rng| {
            let tree = simulate(&self.measure, &self.window, self.t, rng, Method::Direct)?;
            Ok(tree.slice(self.t)?.restrict(&self.inner)?.len() == 1)
        })?;
        let target = (-self.t * self.measure.hitting(&self.inner)?).exp();
        let mut out = Outcome::default();
        out.push(Row::binomial("inner_uncut", Some(self.t), &e, target, 4.0));
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MethodEquivalence {
    pub measure: DrivingMeasure,
    pub window: Polytope,
    pub t: f64,
    pub n: usize,
}

impl Default for MethodEquivalence {
    fn default() -> Self {
        Self {
            measure: lperp(),
            window: square(1.0),
            t: 1.0,
            n: 5000,
        }
    }
}

impl Experiment for MethodEquivalence {
    const NAME: &'static str = "method-equivalence";

    fn run(&self, ctx: &Ctx) -> Result<Outcome> {
        let n = ctx.n(self.n);
        let sample = |method: Method, name: &str| {
            replicate(n, ctx.seed, tag(name), |_, rng| {
                Ok(shape_stats(
                    &simulate(&self.measure, &self.window, self.t, rng, method)?.live(),
                ))
            })
        };
        let direct = sample(Method::Direct, "method-equivalence/direct")?;
        let rejection = sample(Method::Rejection, "method-equivalence/rejection")?;
        let mut out = Outcome::default();
        out.rows.extend(ks_rows("", &direct, &rejection)?);
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Consistency {
    pub measure: DrivingMeasure,
    pub inner: Polytope,
    pub outer: Polytope,
    pub t: f64,
    pub n: usize,
}

impl Default for Consistency {
    fn default() -> Self {
        Self {
            measure: lperp(),
            inner: square(1.0),
            outer: square(2.0),
            t: 1.0,
            n: 5000,
        }
    }
}

impl Experiment for Consistency {
    const NAME: &'static str = "consistency";

    fn run(&self, ctx: &Ctx) -> Result<Outcome> {
        let n = ctx.n(self.n);
        let restricted = replicate(n, ctx.seed, tag("consistency/restricted"), |_, rng| {
            let tree = simulate(&self.measure, &self.outer, self.t, rng, Method::Direct)?;
            Ok(shape_stats(&tree.live().restrict(&self.inner)?))
        })?;
        let direct = replicate(n, ctx.seed, tag("consistency/direct"), |_, rng| {
            Ok(shape_stats(
                &simulate(&self.measure, &self.inner, self.t, rng, Method::Direct)?.live(),
            ))
        })?;
        let mut out = Outcome::default();
        out.rows.extend(ks_rows("", &restricted, &direct)?);
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Iteration {
    pub measure: DrivingMeasure,
    pub window: Polytope,
    pub t: f64,
    pub s: f64,
    pub n: usize,
}

impl Default for Iteration {
    fn default() -> Self {
        Self {
            measure: lperp(),
            window: square(2.0),
            t: 0.5,
            s: 0.5,
            n: 3000,
        }
    }
}

impl Experiment for Iteration {
    const NAME: &'static str = "iteration";

    fn run(&self, ctx: &Ctx) -> Result<Outcome> {
        let n = ctx.n(self.n);
        let whole = replicate(n, ctx.seed, tag("iteration/whole"), |_, rng| {
            Ok(shape_stats(
                &simulate(&self.measure, &self.window, self.t + self.s, rng, Method::Direct)?.live(),
            ))
        })?;
        let nested = replicate(n, ctx.seed, tag("iteration/nested"), |_, rng| {
            let base = simulate(&self.measure, &self.window, self.t, rng, Method::Direct)?.live();
            let nests = (0..base.len())
                .map(|_| Ok(simulate(&self.measure, &self.window, self.s, rng, Method::Direct)?.live()))
                .collect::<Result<Vec<_>>>()?;
            Ok(shape_stats(&base.iterate(&nests)?))
        })?;
        let mut out = Outcome::default();
        out.rows.extend(ks_rows("", &whole, &nested)?);
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StitProperty {
    pub measure: DrivingMeasure,
    pub window: Polytope,
    pub t: f64,
    pub n: usize,
    /// The power check compares `Y_t` with `2 Y_{power_factor t}`.
    pub power_factor: f64,
}

impl Default for StitProperty {
    fn default() -> Self {
        Self {
            measure: lperp(),
            window: square(2.0),
            t: 0.5,
            n: 5000,
            power_factor: 3.0,
        }
    }
}

impl Experiment for StitProperty {
    const NAME: &'static str = "stit-property";

    fn run(&self, ctx: &Ctx) -> Result<Outcome> {
        let n = ctx.n(self.n);
        let half = self.window.scale(0.5)?;
        let at = |t: f64, name: &str| {
            replicate(n, ctx.seed, tag(name), |_, rng| {
                Ok(shape_stats(
                    &simulate(&self.measure, &half, t, rng, Method::Direct)?
                        .live()
                        .scale(2.0)?,
                ))
            })
        };
        let direct = replicate(n, ctx.seed, tag("stit-property/direct"), |_, rng| {
            Ok(shape_stats(
                &simulate(&self.measure, &self.window, self.t, rng, Method::Direct)?.live(),
            ))
        })?;
        let scaled = at(2.0 * self.t, "stit-property/scaled")?;
        let wrong = at(self.power_factor * self.t, "stit-property/power")?;
        let mut out = Outcome::default();
        out.rows.extend(ks_rows("", &direct, &scaled)?);
        let power = ks_rows("power:", &direct, &wrong)?;
        let p_min = power.iter().filter_map(|r| r.p_value).fold(1.0, f64::min);
        out.rows.extend(power.into_iter().map(|mut r| {
            r.pass = None;
            r
        }));
        out.push(
            Row::info("power:detected", Some(self.power_factor), n, p_min)
                .p_value(p_min)
                .check(p_min < crate::report::KS_ALPHA),
        );
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoJump {
    pub measure: DrivingMeasure,
    pub window: Polytope,
    pub t: f64,
    pub t2_grid: Vec<f64>,
    pub n: usize,
}

impl Default for NoJump {
    fn default() -> Self {
        Self {
            measure: lperp(),
            window: square(1.0),
            t: 1.0,
            t2_grid: vec![0.0025, 0.005, 0.01, 0.02, 0.04],
            n: 10_000,
        }
    }
}

impl Experiment for NoJump {
    const NAME: &'static str = "no-jump";

    fn run(&self, ctx: &Ctx) -> Result<Outcome> {
        let n = ctx.n(self.n);
        let mut grid = self.t2_grid.clone();
        grid.sort_by(f64::total_cmp);
        if grid.iter().any(|t2| !(*t2 > 0.0 && *t2 < self.t)) {
            return Err(crate::error::HarnessError::Config("t2 grid must lie in (0, t)".into()));
        }
        let runs = replicate(n, ctx.seed, tag(Self::NAME), |_, rng| {
            let tree = simulate(&self.measure, &self.window, self.t, rng, Method::Direct)?;
            let zeta = tree.live().summary_stats(&self.measure)?.zeta;
            let quiet: Vec<bool> = grid
                .iter()
                .map(|t2| !tree.jump_times.iter().any(|s| *s >= self.t - t2 && *s < self.t))
                .collect();
            Ok((zeta, quiet))
        })?;
        let mean_zeta = runs.iter().map(|r| r.0).sum::<f64>() / n as f64;
        let mut out = Outcome::default();
        out.push(Row::info("mean_zeta", Some(self.t), n, mean_zeta));
        let estimates: Vec<EstimateWithCI> = (0..grid.len())
            .map(|k| EstimateWithCI::from_count(runs.iter().filter(|r| r.1[k]).count(), n, ctx.seed))
            .collect();
        for (t2, e) in grid.iter().zip(&estimates) {
            // plug-in bound e^{-t2 E[ζ_t]}, reported only
            out.push(Row::estimate("no_jump", Some(*t2), e).target((-t2 * mean_zeta).exp()));
        }
        for (k, w) in estimates.windows(2).enumerate() {
            let sigma = (w[0].sigma_at(w[0].p_hat).powi(2) + w[1].sigma_at(w[1].p_hat).powi(2)).sqrt();
            out.push(
                Row::info("monotone", Some(grid[k + 1]), n, w[1].p_hat - w[0].p_hat)
                    .sigma(sigma)
                    .check(w[1].p_hat <= w[0].p_hat + 2.0 * sigma),
            );
        }
        out.note("plug-in bound e^{-t2 E[zeta_t]} in the target column is informational");
        Ok(out)
    }
}
