//! Monte-Carlo verification harness for STIT tessellations.

pub mod error;
pub mod experiments;
pub mod report;
pub mod runner;
pub mod stats;

pub use error::{HarnessError, Result};
pub use experiments::{run_experiment, Experiment, EXPERIMENTS};
pub use report::{Report, Row};
