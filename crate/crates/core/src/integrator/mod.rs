//! Path integration: the jump-adapted log-space scheme, the deterministic
//! RK4 reference, and step-size convergence studies.

mod convergence;
mod scheme;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::jumps::{build_schedule, JumpSchedule};
use crate::model::{drift_state_unchecked, ModelSpec, Species};
use crate::rng::RngSpec;

pub use convergence::{convergence_study, fit_order, ConvergenceReport};
pub use scheme::{apply_jump, step_continuous, Dynamics, XI_OVERFLOW};
pub(crate) use scheme::{cell_count, run_segments, segments, PathEnd, Segment};

/// Largest number of recorded points the default stride aims for.
pub const MAX_RECORDED_POINTS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Uniform grid step between jump events.
    pub dt_max: f64,
    pub horizon: f64,
    /// Keep every k-th uniform grid point (jump times are always kept).
    pub record_stride: usize,
    pub rng: RngSpec,
}

impl SolverConfig {
    /// Config with the default stride for at most [`MAX_RECORDED_POINTS`] grid points.
    pub fn new(dt_max: f64, horizon: f64, rng: RngSpec) -> Self {
        SolverConfig {
            dt_max,
            horizon,
            record_stride: default_stride(dt_max, horizon),
            rng,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn check(&self) -> Result<()> {
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(ModelError::InvalidConfig(format!(
                "dt_max must be > 0, got {}",
                self.dt_max
            )));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(ModelError::InvalidConfig(format!(
                "horizon must be >= 0, got {}",
                self.horizon
            )));
        }
        if self.record_stride == 0 {
            return Err(ModelError::InvalidConfig(
                "record_stride must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

pub fn default_stride(dt_max: f64, horizon: f64) -> usize {
    if !(dt_max > 0.0) {
        return 1;
    }
    let cells = cell_count(dt_max, horizon);
    cells.div_ceil(MAX_RECORDED_POINTS).max(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    /// Hex fingerprint of the spec's canonical JSON.
    pub spec_hash: String,
    pub config: SolverConfig,
    pub seed: u64,
    pub diverged: bool,
    pub diverged_at: Option<f64>,
    /// Some recorded `exp(ξ)` underflowed to zero (log density below about −745).
    pub underflow: bool,
}

/// A recorded path. States are in density space and, unless the path
/// diverged or underflowed, strictly positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<[f64; 2]>,
    pub events: JumpSchedule,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn last(&self) -> [f64; 2] {
        *self.states.last().expect("trajectory has an initial point")
    }

    pub fn is_diverged(&self) -> bool {
        self.meta.diverged
    }

    /// CSV with header `t,x1,x2`; reals in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x1,x2")?;
        for (t, x) in self.times.iter().zip(&self.states) {
            writeln!(w, "{},{},{}", t, x[0], x[1])?;
        }
        Ok(())
    }
}

fn initial_log_state(spec: &ModelSpec) -> Result<[f64; 2]> {
    let [x1, x2] = spec.x0;
    if !(x1 > 0.0 && x2 > 0.0) {
        return Err(ModelError::NonPositiveState(x1, x2));
    }
    Ok([x1.ln(), x2.ln()])
}

/// Simulates one path of the jump-diffusion system.
///
/// Builds the jump schedule, refines the uniform `dt_max` grid so every
/// event time is a grid point, alternates Euler–Maruyama steps in log
/// space with exact multiplicative jumps, and records `x = e^ξ`.
pub fn integrate_path(spec: &ModelSpec, config: &SolverConfig) -> Result<Trajectory> {
    config.check()?;
    let dynamics = Dynamics::new(spec)?;
    let xi0 = initial_log_state(spec)?;
    let schedule = build_schedule(spec, config.horizon, config.rng)?;
    let n_cells = cell_count(config.dt_max, config.horizon);
    let stride = config.record_stride;

    let mut times = vec![0.0];
    let mut states = vec![spec.x0];
    let mut underflow = false;
    let end = run_segments(
        &dynamics,
        xi0,
        segments(config.dt_max, config.horizon, &schedule, &config.rng),
        |seg: &Segment, xi| {
            let keep = seg.event.is_some()
                || (seg.cell_end
                    && ((seg.cell + 1).is_multiple_of(stride) || seg.cell + 1 == n_cells));
            if keep {
                let x = [xi[0].exp(), xi[1].exp()];
                underflow |= x[0] == 0.0 || x[1] == 0.0;
                times.push(seg.t1);
                states.push(x);
            }
        },
    )?;
    let diverged_at = match end {
        PathEnd::Diverged { at } => Some(at),
        PathEnd::Completed(_) => None,
    };
    Ok(Trajectory {
        times,
        states,
        events: schedule,
        meta: TrajectoryMeta {
            spec_hash: format!("{:016x}", spec.fingerprint()),
            config: *config,
            seed: config.rng.seed,
            diverged: diverged_at.is_some(),
            diverged_at,
            underflow,
        },
    })
}

/// Classical RK4 on the state-space drift. Reference for the zero-noise limit;
/// rejects specs with diffusion or active jumps.
pub fn integrate_deterministic(spec: &ModelSpec, config: &SolverConfig) -> Result<Trajectory> {
    config.check()?;
    spec.check()?;
    for sp in Species::BOTH {
        let s = spec.species(sp);
        if s.sigma.extremes() != (0.0, 0.0) {
            return Err(ModelError::InvalidSpec(format!(
                "deterministic integration needs σ_{} ≡ 0",
                sp.index() + 1
            )));
        }
        let active = |pi: &crate::model::LevyMeasureSpec, k: &crate::model::JumpKernel| {
            pi.intensity > 0.0 && !k.is_zero()
        };
        if active(&spec.pi1, &s.gamma) || active(&spec.pi2, &s.delta) {
            return Err(ModelError::InvalidSpec(
                "deterministic integration needs jumps absent".into(),
            ));
        }
    }
    let n = cell_count(config.dt_max, config.horizon);
    let mut x = spec.x0;
    let mut times = vec![0.0];
    let mut states = vec![x];
    let mut diverged_at = None;
    let f = |t: f64, x: [f64; 2]| drift_state_unchecked(spec, t, x);
    let axpy = |x: [f64; 2], h: f64, k: [f64; 2]| [x[0] + h * k[0], x[1] + h * k[1]];
    for k in 0..n {
        let t0 = k as f64 * config.dt_max;
        let t1 = if k + 1 == n {
            config.horizon
        } else {
            (k + 1) as f64 * config.dt_max
        };
        let h = t1 - t0;
        let k1 = f(t0, x);
        let k2 = f(t0 + 0.5 * h, axpy(x, 0.5 * h, k1));
        let k3 = f(t0 + 0.5 * h, axpy(x, 0.5 * h, k2));
        let k4 = f(t1, axpy(x, h, k3));
        for i in 0..2 {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !x.iter().all(|v| v.is_finite()) {
            diverged_at = Some(t0);
            break;
        }
        if (k + 1) % config.record_stride == 0 || k + 1 == n {
            times.push(t1);
            states.push(x);
        }
    }
    Ok(Trajectory {
        times,
        states,
        events: JumpSchedule {
            horizon: config.horizon,
            events: Vec::new(),
        },
        meta: TrajectoryMeta {
            spec_hash: format!("{:016x}", spec.fingerprint()),
            config: *config,
            seed: config.rng.seed,
            diverged: diverged_at.is_some(),
            diverged_at,
            underflow: false,
        },
    })
}
