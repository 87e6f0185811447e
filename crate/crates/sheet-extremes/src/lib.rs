//! Tail bounds for suprema of anisotropic self-similar Gaussian random
//! fields with stationary rectangular increments, and exact simulation
//! of the fractional Brownian sheet to certify them empirically.
//!
//! The crate has three layers:
//! - the probabilistic model ([`field`]): covariance, exact increment
//!   variances, and the self-similarity identities;
//! - analytic machinery ([`metrics`], [`bounds`], [`global`],
//!   [`optimize`]): covering numbers, compact-domain bounds, series
//!   bounds on unbounded domains, and parameter optimization;
//! - the empirical certifier ([`sim`]): an exact Kronecker-structured
//!   sampler plus Monte-Carlo tail estimation with exact binomial
//!   confidence intervals.

pub mod bounds;
pub mod error;
pub mod field;
pub mod global;
pub mod metrics;
pub mod optimize;
pub mod sim;

mod quad;

pub use bounds::{BoundResult, Condition, GenericBoundInputs};
pub use error::{Error, Result};
pub use field::{FieldSample, HurstPair, Point2, Rect};
pub use global::{ExamplePhi, GrowthSchedule, MConstant, Normalizer, SeriesValue, WeightFn};
pub use metrics::{CoveringEstimate, MetricKind};
pub use optimize::{BoundFamily, OptimizationReport};
pub use sim::{FbsSampler, Grid2, IdentityReport, McConfig, TailEstimate};
