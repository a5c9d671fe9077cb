//! The named experiments. Each has a config struct whose `Default` is the
//! acceptance run; sample sizes are multiplied by `n_scale`.

mod encapsulation;
mod laws;
mod mixing;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use stit_core::{DrivingMeasure, Polytope, Tessellation};

use crate::error::{HarnessError, Result};
use crate::report::{Outcome, Report, Row};
use crate::stats::{ks_two_sample, MIN_REPLICATES};

pub use encapsulation::{
    encapsulation_limit, CondIndependence, CoupledInclusion, EncapsulationBound, EncapsulationEquality,
};
pub use laws::{Capacity, Consistency, FirstSplit, Iteration, MethodEquivalence, NoJump, StitProperty};
pub use mixing::{Mixing, PhtCapacity};

/// Run-wide inputs that are not part of an experiment's config.
#[derive(Debug, Clone, Copy)]
pub struct Ctx {
    pub seed: u64,
    pub n_scale: f64,
}

impl Ctx {
    /// `base` scaled by `n_scale`, never below the estimator minimum.
    pub fn n(&self, base: usize) -> usize {
        ((base as f64 * self.n_scale).round() as usize).max(MIN_REPLICATES)
    }
}

pub trait Experiment: Serialize + DeserializeOwned + Default {
    const NAME: &'static str;
    fn run(&self, ctx: &Ctx) -> Result<Outcome>;
}

pub const EXPERIMENTS: &[&str] = &[
    FirstSplit::NAME,
    Capacity::NAME,
    MethodEquivalence::NAME,
    Consistency::NAME,
    Iteration::NAME,
    StitProperty::NAME,
    EncapsulationEquality::NAME,
    EncapsulationBound::NAME,
    CoupledInclusion::NAME,
    CondIndependence::NAME,
    Mixing::NAME,
    PhtCapacity::NAME,
    NoJump::NAME,
];

fn drive<E: Experiment>(config: Option<&Value>, seed: u64, n_scale: f64) -> Result<Report> {
    if !(n_scale > 0.0 && n_scale.is_finite()) {
        return Err(HarnessError::Config(format!("n_scale must be positive, got {n_scale}")));
    }
    let cfg: E = match config {
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| HarnessError::Config(e.to_string()))?,
        None => E::default(),
    };
    let mut resolved = serde_json::to_value(&cfg).map_err(|e| HarnessError::Config(e.to_string()))?;
    resolved["n_scale"] = n_scale.into();
    let mut outcome = cfg.run(&Ctx { seed, n_scale })?;
    if n_scale < 1.0 {
        outcome.note(format!("reduced power: sample sizes scaled by {n_scale}"));
    }
    Ok(Report::new(E::NAME, resolved, seed, outcome))
}

/// Runs one named experiment. `config` overrides the default config.
pub fn run_experiment(name: &str, config: Option<&Value>, seed: u64, n_scale: f64) -> Result<Report> {
    match name {
        FirstSplit::NAME => drive::<FirstSplit>(config, seed, n_scale),
        Capacity::NAME => drive::<Capacity>(config, seed, n_scale),
        MethodEquivalence::NAME => drive::<MethodEquivalence>(config, seed, n_scale),
        Consistency::NAME => drive::<Consistency>(config, seed, n_scale),
        Iteration::NAME => drive::<Iteration>(config, seed, n_scale),
        StitProperty::NAME => drive::<StitProperty>(config, seed, n_scale),
        EncapsulationEquality::NAME => drive::<EncapsulationEquality>(config, seed, n_scale),
        EncapsulationBound::NAME => drive::<EncapsulationBound>(config, seed, n_scale),
        CoupledInclusion::NAME => drive::<CoupledInclusion>(config, seed, n_scale),
        CondIndependence::NAME => drive::<CondIndependence>(config, seed, n_scale),
        Mixing::NAME => drive::<Mixing>(config, seed, n_scale),
        PhtCapacity::NAME => drive::<PhtCapacity>(config, seed, n_scale),
        NoJump::NAME => drive::<NoJump>(config, seed, n_scale),
        other => Err(HarnessError::UnknownExperiment(other.to_string())),
    }
}

fn lperp() -> DrivingMeasure {
    DrivingMeasure::axis_parallel(&[1.0, 1.0]).expect("valid weights")
}

fn square(a: f64) -> Polytope {
    Polytope::cube(2, a)
}

/// `(cell count, internal boundary length)` of a tessellation.
fn shape_stats(t: &Tessellation) -> (f64, f64) {
    (t.len() as f64, t.internal_boundary())
}

/// KS rows on both summary statistics.
fn ks_rows(prefix: &str, a: &[(f64, f64)], b: &[(f64, f64)]) -> Result<Vec<Row>> {
    let split = |v: &[(f64, f64)]| -> (Vec<f64>, Vec<f64>) { v.iter().copied().unzip() };
    let ((ac, ab), (bc, bb)) = (split(a), split(b));
    Ok(vec![
        Row::ks(format!("{prefix}cell_count"), &ks_two_sample(&ac, &bc)?),
        Row::ks(format!("{prefix}boundary"), &ks_two_sample(&ab, &bb)?),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn unknown_names_and_bad_configs_are_config_errors() {
        let e = run_experiment("nope", None, 1, 1.0).unwrap_err();
        assert!(e.is_config());
        let e = run_experiment("first-split", Some(&json!({"bogus": 1})), 1, 1.0).unwrap_err();
        assert!(e.is_config());
        assert!(run_experiment("first-split", None, 1, 0.0).unwrap_err().is_config());
    }

    #[test]
    fn scaling_keeps_a_floor() {
        let ctx = Ctx {
            seed: 0,
            n_scale: 0.001,
        };
        assert_eq!(ctx.n(10_000), MIN_REPLICATES);
        assert_eq!(Ctx { seed: 0, n_scale: 0.5 }.n(10_000), 5000);
    }
}
