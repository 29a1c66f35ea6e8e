//! Event streams of the two independent Poisson random measures.

use std::io::{self, Write};

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::model::{LevyMeasureSpec, MarkDistribution, ModelSpec};
use crate::rng::{Purpose, RngSpec};

/// One realised atom of ν_1 (`measure == 1`) or ν_2 (`measure == 2`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    pub measure: u8,
    pub mark: f64,
}

/// Time-ordered events of both measures over `[0, horizon]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JumpSchedule {
    pub horizon: f64,
    pub events: Vec<JumpEvent>,
}

impl JumpSchedule {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn of_measure(&self, measure: u8) -> impl Iterator<Item = &JumpEvent> + '_ {
        self.events.iter().filter(move |e| e.measure == measure)
    }

    /// CSV with header `time,measure_id,mark`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "time,measure_id,mark")?;
        for e in &self.events {
            writeln!(w, "{},{},{}", e.time, e.measure, e.mark)?;
        }
        Ok(())
    }
}

/// Arrival times of a homogeneous Poisson process: partial sums of
/// Exponential(intensity) gaps, truncated at `horizon`.
pub fn sample_event_times<R: Rng + ?Sized>(
    intensity: f64,
    horizon: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if intensity < 0.0 || intensity.is_nan() {
        return Err(ModelError::NegativeIntensity(intensity));
    }
    if intensity == 0.0 || horizon <= 0.0 {
        return Ok(Vec::new());
    }
    let gap = Exp::new(intensity).map_err(|e| ModelError::InvalidSpec(e.to_string()))?;
    let mut times = Vec::with_capacity((intensity * horizon * 1.2) as usize + 4);
    let mut t = 0.0;
    loop {
        t += gap.sample(rng);
        if t > horizon {
            break;
        }
        times.push(t);
    }
    Ok(times)
}

/// One draw from the normalised mark law.
pub fn sample_mark<R: Rng + ?Sized>(dist: &MarkDistribution, rng: &mut R) -> f64 {
    match dist {
        MarkDistribution::Atom { z } => *z,
        MarkDistribution::Discrete { atoms } => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (z, p) in atoms {
                acc += p;
                if u < acc {
                    return *z;
                }
            }
            // u landed in the rounding slack above the last cumulative sum
            atoms
                .iter()
                .rev()
                .find(|(_, p)| *p > 0.0)
                .map_or(atoms[atoms.len() - 1].0, |(z, _)| *z)
        }
        MarkDistribution::Uniform { lo, hi } => {
            let u: f64 = rng.random();
            lo + (hi - lo) * u
        }
    }
}

fn measure_events(
    measure: &LevyMeasureSpec,
    id: u8,
    horizon: f64,
    rng: &RngSpec,
    times: Purpose,
    marks: Purpose,
) -> Result<Vec<JumpEvent>> {
    let ts = sample_event_times(measure.intensity, horizon, &mut rng.stream(times))?;
    let mut mark_rng = rng.stream(marks);
    Ok(ts
        .into_iter()
        .map(|time| JumpEvent {
            time,
            measure: id,
            mark: sample_mark(&measure.marks, &mut mark_rng),
        })
        .collect())
}

/// Merges independent event streams for Π_1 and Π_2. Each measure draws
/// times and marks from its own substreams, so changing one measure leaves
/// the other's events untouched. Ties go to measure 1 first and are then
/// separated by one ulp to keep times strictly increasing.
pub fn build_schedule(spec: &ModelSpec, horizon: f64, rng: RngSpec) -> Result<JumpSchedule> {
    let first = measure_events(
        &spec.pi1,
        1,
        horizon,
        &rng,
        Purpose::Measure1Times,
        Purpose::Measure1Marks,
    )?;
    let second = measure_events(
        &spec.pi2,
        2,
        horizon,
        &rng,
        Purpose::Measure2Times,
        Purpose::Measure2Marks,
    )?;

    let mut events = Vec::with_capacity(first.len() + second.len());
    let (mut i, mut j) = (0, 0);
    while i < first.len() || j < second.len() {
        let take_first = j >= second.len() || (i < first.len() && first[i].time <= second[j].time);
        let mut e = if take_first {
            i += 1;
            first[i - 1]
        } else {
            j += 1;
            second[j - 1]
        };
        if let Some(prev) = events.last() {
            let prev: &JumpEvent = prev;
            if e.time <= prev.time {
                e.time = prev.time.next_up();
            }
        }
        events.push(e);
    }
    Ok(JumpSchedule { horizon, events })
}
