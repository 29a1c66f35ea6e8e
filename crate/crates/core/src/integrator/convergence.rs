//! Empirical strong and weak convergence orders of the log-space scheme.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scheme::{cell_count, run_segments, segments, Dynamics, PathEnd, Segment};
use crate::error::{ModelError, Result};
use crate::jumps::build_schedule;
use crate::model::ModelSpec;
use crate::rng::RngSpec;

/// The reference solution uses this many sub-steps of the finest requested step.
pub const REFERENCE_REFINEMENT: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub dts: Vec<f64>,
    pub reference_dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// `E|X_dt(T) − X_ref(T)|` (Euclidean norm over both species).
    pub strong_errors: Vec<f64>,
    /// `|E X_dt(T) − E X_ref(T)|`.
    pub weak_errors: Vec<f64>,
    /// Least-squares log-log slopes; `None` when fewer than two errors are positive.
    pub strong_order: Option<f64>,
    pub weak_order: Option<f64>,
    pub diverged_paths: usize,
}

/// Slope of `ln err` against `ln dt`, ignoring non-positive errors.
pub fn fit_order(dts: &[f64], errors: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = dts
        .iter()
        .zip(errors)
        .filter(|(_, e)| **e > 0.0 && e.is_finite())
        .map(|(d, e)| (d.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Merges consecutive fine segments into the jump-adapted grid of step
/// `ratio * fine_dt`, summing Brownian increments.
fn coarsen(fine: &[Segment], ratio: usize, n_fine_cells: usize) -> Vec<Segment> {
    let mut out = Vec::with_capacity(fine.len() / ratio + 8);
    let mut start = 0.0;
    let mut acc = [0.0; 2];
    for seg in fine {
        acc[0] += seg.dw[0];
        acc[1] += seg.dw[1];
        let boundary =
            seg.cell_end && ((seg.cell + 1) % ratio == 0 || seg.cell + 1 == n_fine_cells);
        if seg.event.is_some() || boundary {
            out.push(Segment {
                t0: start,
                t1: seg.t1,
                dw: acc,
                event: seg.event,
                cell: seg.cell / ratio,
                cell_end: boundary,
            });
            start = seg.t1;
            acc = [0.0; 2];
        }
    }
    out
}

/// Strong and weak errors at `horizon` for each step in `dts`, measured
/// against a reference run with step `min(dts) / 8` on the same Brownian
/// and jump realisations (coarse increments are sums of fine ones).
pub fn convergence_study(
    spec: &ModelSpec,
    dts: &[f64],
    n_paths: usize,
    horizon: f64,
    seed: u64,
) -> Result<ConvergenceReport> {
    if dts.len() < 3 {
        return Err(ModelError::InvalidConfig(format!(
            "need at least 3 step sizes, got {}",
            dts.len()
        )));
    }
    if n_paths == 0 || !(horizon > 0.0) {
        return Err(ModelError::InvalidConfig(
            "convergence study needs n_paths >= 1 and horizon > 0".into(),
        ));
    }
    let finest = dts.iter().copied().fold(f64::INFINITY, f64::min);
    if !(finest > 0.0) {
        return Err(ModelError::InvalidConfig("step sizes must be > 0".into()));
    }
    let reference_dt = finest / REFERENCE_REFINEMENT as f64;
    let ratios: Vec<usize> = dts
        .iter()
        .map(|dt| {
            let r = dt / reference_dt;
            let ri = r.round();
            if (r - ri).abs() > 1e-9 * r {
                Err(ModelError::InvalidConfig(format!(
                    "step {dt} is not an integer multiple of the reference step {reference_dt}"
                )))
            } else {
                Ok(ri as usize)
            }
        })
        .collect::<Result<_>>()?;

    let dynamics = Dynamics::new(spec)?;
    let xi0 = [spec.x0[0].ln(), spec.x0[1].ln()];
    let n_fine = cell_count(reference_dt, horizon);

    // per path: (final state at each coarse level, reference final state)
    type PathFinals = Option<(Vec<[f64; 2]>, [f64; 2])>;
    let finals: Vec<PathFinals> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| -> Result<_> {
            let rng = RngSpec::new(seed, p);
            let schedule = build_schedule(spec, horizon, rng)?;
            let fine: Vec<Segment> = segments(reference_dt, horizon, &schedule, &rng).collect();
            let reference = match run_segments(&dynamics, xi0, fine.iter().copied(), |_, _| {})? {
                PathEnd::Completed(xi) => xi,
                PathEnd::Diverged { .. } => return Ok(None),
            };
            let mut levels = Vec::with_capacity(ratios.len());
            for &r in &ratios {
                let coarse = coarsen(&fine, r, n_fine);
                match run_segments(&dynamics, xi0, coarse.into_iter(), |_, _| {})? {
                    PathEnd::Completed(xi) => levels.push([xi[0].exp(), xi[1].exp()]),
                    PathEnd::Diverged { .. } => return Ok(None),
                }
            }
            Ok(Some((levels, [reference[0].exp(), reference[1].exp()])))
        })
        .collect::<Result<_>>()?;

    let ok: Vec<&(Vec<[f64; 2]>, [f64; 2])> = finals.iter().flatten().collect();
    let diverged_paths = n_paths - ok.len();
    if ok.is_empty() {
        return Err(ModelError::AllDiverged {
            n_paths,
            dt_max: dts.iter().copied().fold(0.0, f64::max),
        });
    }
    let n = ok.len() as f64;
    let mut strong = vec![0.0; dts.len()];
    let mut mean_level = vec![[0.0; 2]; dts.len()];
    let mut mean_ref = [0.0; 2];
    for (levels, reference) in &ok {
        for k in 0..2 {
            mean_ref[k] += reference[k] / n;
        }
        for (l, x) in levels.iter().enumerate() {
            strong[l] += (x[0] - reference[0]).hypot(x[1] - reference[1]) / n;
            for k in 0..2 {
                mean_level[l][k] += x[k] / n;
            }
        }
    }
    let weak: Vec<f64> = mean_level
        .iter()
        .map(|m| (m[0] - mean_ref[0]).hypot(m[1] - mean_ref[1]))
        .collect();

    Ok(ConvergenceReport {
        dts: dts.to_vec(),
        reference_dt,
        horizon,
        n_paths,
        seed,
        strong_order: fit_order(dts, &strong),
        weak_order: fit_order(dts, &weak),
        strong_errors: strong,
        weak_errors: weak,
        diverged_paths,
    })
}
