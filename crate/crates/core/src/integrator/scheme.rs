//! Log-space jump-adapted Euler–Maruyama.
//!
//! Between jump events the log densities follow the continuous part of the
//! log-transformed system with the compensators of both measures moved into
//! the drift; at an event each `ξ_i` receives `ln(1 + amplitude)` exactly.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{ModelError, Result};
use crate::jumps::{JumpEvent, JumpSchedule};
use crate::model::{per_capita, ModelSpec, Species};
use crate::rng::{Purpose, RngSpec};

/// Log densities above this are treated as numerical blow-up.
pub const XI_OVERFLOW: f64 = 700.0;

/// A spec with the time-independent parts of the jump compensators precomputed.
#[derive(Clone, Debug)]
pub struct Dynamics<'a> {
    spec: &'a ModelSpec,
    /// `∫ shape_γi(z) Π_1(dz)`, so that `∫ γ_i(t,z) Π_1(dz) = scale_γi(t) * gamma_mass[i]`.
    gamma_mass: [f64; 2],
}

impl<'a> Dynamics<'a> {
    /// Fails if any active jump kernel can reach `1 + amplitude <= 0`.
    pub fn new(spec: &'a ModelSpec) -> Result<Self> {
        spec.check()?;
        for sp in Species::BOTH {
            let s = spec.species(sp);
            for (k, pi) in [(&s.gamma, &spec.pi1), (&s.delta, &spec.pi2)] {
                if pi.intensity > 0.0 && !k.is_zero() {
                    let (lo, _) = k.amplitude_bounds(&pi.marks);
                    if lo <= -1.0 {
                        return Err(ModelError::KernelDomain {
                            t: f64::NAN,
                            z: f64::NAN,
                            amplitude: lo,
                        });
                    }
                }
            }
        }
        let mass = |sp: Species| spec.species(sp).gamma.shape_mass(&spec.pi1);
        Ok(Dynamics {
            spec,
            gamma_mass: [mass(Species::Prey), mass(Species::Predator)],
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        self.spec
    }

    /// Continuous-part drift of `ξ` when jumps are applied event by event:
    /// `(−1)^{i−1}(a_i − c_i e^{ξ_{3−i}}/(1 + m e^{ξ_1})) − b_i e^{ξ_i} − σ_i²/2 − ∫γ_i Π_1(dz)`.
    /// `None` when `ξ` is past the overflow guard.
    #[inline]
    pub fn event_drift(&self, t: f64, xi: [f64; 2]) -> Option<[f64; 2]> {
        if xi[0] > XI_OVERFLOW || xi[1] > XI_OVERFLOW {
            return None;
        }
        let s = self.spec;
        let r = per_capita(s, t, xi[0].exp(), xi[1].exp());
        let sig = [s.prey.sigma.at(t), s.predator.sigma.at(t)];
        let comp = [
            s.prey.gamma.scale.at(t) * self.gamma_mass[0],
            s.predator.gamma.scale.at(t) * self.gamma_mass[1],
        ];
        Some([
            r[0] - 0.5 * sig[0] * sig[0] - comp[0],
            r[1] - 0.5 * sig[1] * sig[1] - comp[1],
        ])
    }

    /// One Euler–Maruyama step of the continuous part; `None` flags divergence.
    #[inline]
    pub fn step(&self, t: f64, xi: [f64; 2], dt: f64, dw: [f64; 2]) -> Option<[f64; 2]> {
        let g = self.event_drift(t, xi)?;
        let s = self.spec;
        let out = [
            xi[0] + g[0] * dt + s.prey.sigma.at(t) * dw[0],
            xi[1] + g[1] * dt + s.predator.sigma.at(t) * dw[1],
        ];
        if out.iter().all(|v| v.is_finite() && *v <= XI_OVERFLOW) {
            Some(out)
        } else {
            None
        }
    }

    /// Multiplicative jump: both species see the same mark.
    pub fn jump(&self, t: f64, xi: [f64; 2], event: &JumpEvent) -> Result<[f64; 2]> {
        let mut out = xi;
        for sp in Species::BOTH {
            let s = self.spec.species(sp);
            let kernel = if event.measure == 1 {
                &s.gamma
            } else {
                &s.delta
            };
            let amplitude = kernel.amplitude(t, event.mark);
            if amplitude <= -1.0 {
                return Err(ModelError::KernelDomain {
                    t,
                    z: event.mark,
                    amplitude,
                });
            }
            out[sp.index()] += amplitude.ln_1p();
        }
        Ok(out)
    }
}

/// `ξ' = ξ + g(t, ξ) dt + σ(t) dW`; `Ok(None)` flags a diverged step.
pub fn step_continuous(
    spec: &ModelSpec,
    t: f64,
    xi: [f64; 2],
    dt: f64,
    dw: [f64; 2],
) -> Result<Option<[f64; 2]>> {
    if !(dt > 0.0) {
        return Err(ModelError::InvalidConfig(format!(
            "step must be > 0, got {dt}"
        )));
    }
    Ok(Dynamics::new(spec)?.step(t, xi, dt, dw))
}

/// `ξ_i' = ξ_i + ln(1 + γ_i(t, z))` for a ν_1 event, `ln(1 + δ_i(t, z))` for a ν_2 event.
pub fn apply_jump(spec: &ModelSpec, t: f64, xi: [f64; 2], event: &JumpEvent) -> Result<[f64; 2]> {
    Dynamics::new(spec)?.jump(t, xi, event)
}

/// A piece of the jump-adapted grid: advance over `[t0, t1]` with Brownian
/// increment `dw`, then apply `event` (if any) at `t1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Segment {
    pub t0: f64,
    pub t1: f64,
    pub dw: [f64; 2],
    pub event: Option<JumpEvent>,
    /// Index of the uniform cell this segment belongs to.
    pub cell: usize,
    /// Whether `t1` is the right end of the uniform cell.
    pub cell_end: bool,
}

/// Generates the jump-adapted grid with its Brownian increments.
///
/// Each uniform cell of width `dt` draws one normal pair from the Brownian
/// stream whether or not it contains events; events split the cell via a
/// Brownian bridge fed from a separate stream. The Brownian path is
/// therefore the same for any jump configuration.
pub(crate) struct SegmentIter<'s> {
    dt: f64,
    horizon: f64,
    n_cells: usize,
    cell: usize,
    events: &'s [JumpEvent],
    next_event: usize,
    brownian: ChaCha8Rng,
    bridge: ChaCha8Rng,
    // state inside the current cell
    cursor: f64,
    cell_t1: f64,
    remaining: [f64; 2],
    in_cell: bool,
}

pub(crate) fn cell_count(dt: f64, horizon: f64) -> usize {
    if horizon <= 0.0 {
        0
    } else {
        ((horizon / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }
}

pub(crate) fn segments<'s>(
    dt: f64,
    horizon: f64,
    schedule: &'s JumpSchedule,
    rng: &RngSpec,
) -> SegmentIter<'s> {
    SegmentIter {
        dt,
        horizon,
        n_cells: cell_count(dt, horizon),
        cell: 0,
        events: &schedule.events,
        next_event: 0,
        brownian: rng.stream(Purpose::Brownian),
        bridge: rng.stream(Purpose::BrownianBridge),
        cursor: 0.0,
        cell_t1: 0.0,
        remaining: [0.0; 2],
        in_cell: false,
    }
}

impl Iterator for SegmentIter<'_> {
    type Item = Segment;

    fn next(&mut self) -> Option<Segment> {
        if !self.in_cell {
            if self.cell >= self.n_cells {
                return None;
            }
            let t0 = self.cell as f64 * self.dt;
            let t1 = if self.cell + 1 == self.n_cells {
                self.horizon
            } else {
                (self.cell + 1) as f64 * self.dt
            };
            let sd = (t1 - t0).sqrt();
            let z0: f64 = self.brownian.sample(StandardNormal);
            let z1: f64 = self.brownian.sample(StandardNormal);
            self.cursor = t0;
            self.cell_t1 = t1;
            self.remaining = [sd * z0, sd * z1];
            self.in_cell = true;
        }
        let t0 = self.cursor;
        let t1 = self.cell_t1;
        let cell = self.cell;
        if let Some(e) = self.events.get(self.next_event).copied() {
            if e.time <= t1 && e.time <= self.horizon {
                self.next_event += 1;
                let s = e.time.max(t0);
                let dw = if s >= t1 {
                    std::mem::take(&mut self.remaining)
                } else if s > t0 {
                    let frac = (s - t0) / (t1 - t0);
                    let sd = ((s - t0) * (t1 - s) / (t1 - t0)).sqrt();
                    let mut dw = [0.0; 2];
                    for (k, out) in dw.iter_mut().enumerate() {
                        let z: f64 = self.bridge.sample(StandardNormal);
                        *out = self.remaining[k] * frac + sd * z;
                        self.remaining[k] -= *out;
                    }
                    dw
                } else {
                    [0.0; 2]
                };
                let cell_end = s >= t1;
                self.cursor = s;
                if cell_end {
                    self.in_cell = false;
                    self.cell += 1;
                }
                return Some(Segment {
                    t0,
                    t1: s,
                    dw,
                    event: Some(e),
                    cell,
                    cell_end,
                });
            }
        }
        self.in_cell = false;
        self.cell += 1;
        Some(Segment {
            t0,
            t1,
            dw: std::mem::take(&mut self.remaining),
            event: None,
            cell,
            cell_end: true,
        })
    }
}

/// Outcome of advancing one path over a segment stream.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum PathEnd {
    Completed([f64; 2]),
    Diverged { at: f64 },
}

/// Runs the scheme; `visit(segment, ξ_after)` is called after every segment.
pub(crate) fn run_segments<I, F>(
    dynamics: &Dynamics,
    xi0: [f64; 2],
    segs: I,
    mut visit: F,
) -> Result<PathEnd>
where
    I: Iterator<Item = Segment>,
    F: FnMut(&Segment, [f64; 2]),
{
    let mut xi = xi0;
    for seg in segs {
        if seg.t1 > seg.t0 {
            match dynamics.step(seg.t0, xi, seg.t1 - seg.t0, seg.dw) {
                Some(next) => xi = next,
                None => return Ok(PathEnd::Diverged { at: seg.t0 }),
            }
        }
        if let Some(e) = &seg.event {
            xi = dynamics.jump(seg.t1, xi, e)?;
            if xi[0] > XI_OVERFLOW || xi[1] > XI_OVERFLOW {
                return Ok(PathEnd::Diverged { at: seg.t1 });
            }
        }
        visit(&seg, xi);
    }
    Ok(PathEnd::Completed(xi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jumps::build_schedule;
    use crate::model::{JumpKernel, LevyMeasureSpec, SpeciesParams};

    fn logistic() -> ModelSpec {
        ModelSpec {
            prey: SpeciesParams::constant(1.0, 0.5, 0.0),
            predator: SpeciesParams::constant(0.5, 0.1, 0.0),
            m: 1.0.into(),
            kappa: None,
            pi1: LevyMeasureSpec::none(),
            pi2: LevyMeasureSpec::none(),
            x0: [1.0, 1.0],
        }
    }

    #[test]
    fn zero_coefficients_leave_state_unchanged() {
        let mut spec = logistic();
        spec.prey = SpeciesParams::constant(0.0, 0.0, 0.0);
        spec.predator = SpeciesParams::constant(0.0, 0.0, 0.0);
        let out = step_continuous(&spec, 0.0, [0.4, -1.2], 0.1, [0.0, 0.0]).unwrap();
        assert_eq!(out, Some([0.4, -1.2]));
    }

    #[test]
    fn one_logistic_euler_step() {
        let out = step_continuous(&logistic(), 0.0, [0.0, 0.0], 0.01, [0.0, 0.0])
            .unwrap()
            .unwrap();
        assert!((out[0] - 0.005).abs() < 1e-16);
    }

    #[test]
    fn overflow_is_flagged_not_raised() {
        let out = step_continuous(&logistic(), 0.0, [701.0, 0.0], 0.01, [0.0, 0.0]).unwrap();
        assert_eq!(out, None);
    }

    #[test]
    fn jumps_are_multiplicative() {
        let mut spec = logistic();
        spec.prey.gamma = JumpKernel::constant(0.1);
        spec.predator.delta = JumpKernel::constant(-0.5);
        spec.pi1 = LevyMeasureSpec::atom(1.0, 0.0);
        spec.pi2 = LevyMeasureSpec::atom(1.0, 0.0);
        let e1 = JumpEvent {
            time: 0.0,
            measure: 1,
            mark: 0.0,
        };
        let e2 = JumpEvent {
            time: 0.0,
            measure: 2,
            mark: 0.0,
        };
        let xi = [0.0, 2f64.ln()];
        let after = apply_jump(&spec, 0.0, xi, &e1).unwrap();
        assert!((after[0].exp() - 1.1).abs() < 1e-15);
        assert_eq!(after[1], xi[1]);
        let after = apply_jump(&spec, 0.0, xi, &e2).unwrap();
        assert_eq!(after[0], xi[0]);
        assert!((after[1].exp() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn segments_cover_every_event_once() {
        let mut spec = logistic();
        spec.pi1 = LevyMeasureSpec::atom(30.0, 0.0);
        spec.pi2 = LevyMeasureSpec::atom(10.0, 0.0);
        let rng = RngSpec::new(3, 1);
        let sched = build_schedule(&spec, 2.0, rng).unwrap();
        let segs: Vec<Segment> = segments(0.1, 2.0, &sched, &rng).collect();
        let evs: Vec<f64> = segs
            .iter()
            .filter_map(|s| s.event.map(|e| e.time))
            .collect();
        let expected: Vec<f64> = sched.events.iter().map(|e| e.time).collect();
        assert_eq!(evs, expected);
        for w in segs.windows(2) {
            assert_eq!(w[0].t1, w[1].t0);
        }
        assert_eq!(segs.last().unwrap().t1, 2.0);
        assert_eq!(segs.iter().filter(|s| s.cell_end).count(), 20);
    }

    #[test]
    fn bridge_pieces_sum_to_cell_increment() {
        let mut spec = logistic();
        spec.pi1 = LevyMeasureSpec::atom(50.0, 0.0);
        let rng = RngSpec::new(8, 0);
        let sched = build_schedule(&spec, 1.0, rng).unwrap();
        let none = JumpSchedule {
            horizon: 1.0,
            events: vec![],
        };
        let with: Vec<Segment> = segments(0.25, 1.0, &sched, &rng).collect();
        let without: Vec<Segment> = segments(0.25, 1.0, &none, &rng).collect();
        for (cell, whole) in without.iter().enumerate() {
            let sum: f64 = with
                .iter()
                .filter(|s| s.cell == cell)
                .map(|s| s.dw[0])
                .sum();
            let whole = whole.dw[0];
            assert!((sum - whole).abs() < 1e-14, "cell {cell}: {sum} vs {whole}");
        }
    }
}
