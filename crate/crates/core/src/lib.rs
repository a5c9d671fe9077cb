//! STIT and Poisson hyperplane tessellations in bounded windows.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod encapsulation;
pub mod error;
pub mod geometry;
pub mod json;
pub mod measure;
pub mod pht;
pub mod rng;
pub mod stit;
pub mod svg;
pub mod tessellation;

pub use error::{Result, StitError};
pub use geometry::{Direction, Hyperplane, Polytope};
pub use measure::DrivingMeasure;
pub use rng::RandomStream;
pub use stit::{simulate, CellTree, Method};
pub use tessellation::{StatRecord, Tessellation};
