//! Workloads shared by the benchmarks.

use predprey::{fixtures, ModelSpec, RngSpec, SolverConfig};

/// Named specs covering the integrator's code paths: diffusion only,
/// both jump measures with quadrature marks, and pure jumps.
pub fn specs() -> Vec<(&'static str, ModelSpec)> {
    vec![
        ("diffusive", fixtures::diffusive()),
        ("baseline", fixtures::baseline()),
        ("pure_jump", fixtures::pure_jump()),
    ]
}

/// `steps` uniform cells of width 1e-3, recording only the end point.
pub fn solver(steps: usize) -> SolverConfig {
    let horizon = steps as f64 * 1e-3;
    SolverConfig::new(1e-3, horizon, RngSpec::new(1, 0)).with_stride(steps)
}
