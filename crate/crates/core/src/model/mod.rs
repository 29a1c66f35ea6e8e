//! Coefficients, jump kernels, derived rates and the assumption validator.

mod drift;
mod kernel;
mod levy;
mod rates;
mod spec;
mod time_fn;
mod validate;

pub use drift::{drift_log, drift_state};
pub(crate) use drift::{drift_state_unchecked, per_capita};
pub use kernel::{jump_integral, JumpKernel, Shape, Transform};
pub use levy::{LevyMeasureSpec, MarkDistribution};
pub use rates::{
    beta, derived_rate, extremes, is_time_invariant, time_average, RateExtremes, RateKind,
};
pub use spec::{fnv1a64, ModelSpec, Species, SpeciesParams};
pub use time_fn::TimeFunction;
pub use validate::{validate_assumptions, Clause, Severity, ValidationOptions, ValidationReport};
