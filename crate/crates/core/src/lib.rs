//! Simulation and analysis of a stochastic predator-prey system with a
//! Holling type II response, Brownian noise and two Poisson random measures.
//!
//! ```text
//! dx1 = x1[a1 − c1 x2/(1 + m x1) − b1 x1]dt + σ1 x1 dW1 + ∫ γ1 x1 ν̃1(dt,dz) + ∫ δ1 x1 ν2(dt,dz)
//! dx2 = x2[−a2 + c2 x1/(1 + m x1) − b2 x2]dt + σ2 x2 dW2 + ∫ γ2 x2 ν̃1(dt,dz) + ∫ δ2 x2 ν2(dt,dz)
//! ```
//!
//! Paths are integrated for `ξ = ln x`, which keeps densities positive.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod fixtures;
pub mod integrator;
pub mod jumps;
pub mod model;
pub mod quadrature;
pub mod rng;

pub use analysis::{
    classify_regime, run_ensemble, verify_all, ClassifyOptions, EnsembleStats, EstimatorConfig,
    RegimeLabel, RegimeReport, Verdict, VerifyOptions,
};
pub use error::{ModelError, Result};
pub use integrator::{
    convergence_study, integrate_deterministic, integrate_path, ConvergenceReport, SolverConfig,
    Trajectory,
};
pub use jumps::{build_schedule, JumpEvent, JumpSchedule};
pub use model::{
    validate_assumptions, JumpKernel, LevyMeasureSpec, MarkDistribution, ModelSpec, Species,
    SpeciesParams, TimeFunction, ValidationOptions, ValidationReport,
};
pub use rng::RngSpec;
