//! Monte Carlo ensembles and their per-checkpoint statistics.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::integrator::{run_segments, segments, Dynamics, PathEnd, Segment, SolverConfig};
use crate::jumps::build_schedule;
use crate::model::ModelSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Exponents `p` for the moments `E[x_i^p]`.
    pub moments: Vec<f64>,
    /// Exponent of the inverse moment `E[(1/x_i)^θ]`, in `(0, 1)`.
    pub theta: f64,
    /// Radius for the exceedance frequency `P{|X| > χ}`.
    pub chi: f64,
    pub extinction_threshold: f64,
    /// Spacing of the statistics grid.
    pub stats_interval: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            moments: vec![1.0, 2.0],
            theta: 0.5,
            chi: 10.0,
            extinction_threshold: 1e-3,
            stats_interval: 1.0,
        }
    }
}

impl EstimatorConfig {
    pub fn check(&self) -> Result<()> {
        if let Some(p) = self.moments.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return Err(ModelError::InvalidConfig(format!(
                "moment exponent must be > 0, got {p}"
            )));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(ModelError::InvalidConfig(format!(
                "theta must lie in (0, 1), got {}",
                self.theta
            )));
        }
        if !(self.chi >= 0.0) {
            return Err(ModelError::InvalidConfig(format!(
                "chi must be >= 0, got {}",
                self.chi
            )));
        }
        if !(self.extinction_threshold > 0.0) {
            return Err(ModelError::InvalidConfig(format!(
                "extinction threshold must be > 0, got {}",
                self.extinction_threshold
            )));
        }
        if !(self.stats_interval > 0.0 && self.stats_interval.is_finite()) {
            return Err(ModelError::InvalidConfig(format!(
                "stats interval must be > 0, got {}",
                self.stats_interval
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeciesStats {
    pub mean: f64,
    pub var: f64,
    pub q01: f64,
    pub q50: f64,
    pub q99: f64,
    /// `E[x^p]` for each configured `p`, in order.
    pub moments: Vec<f64>,
    /// `E[(1/x)^θ]`.
    pub inverse_moment: f64,
    pub extinct_fraction: f64,
    /// Summary over paths of `(1/t)∫_0^t x ds`.
    pub time_avg_mean: f64,
    pub time_avg_min: f64,
    pub time_avg_max: f64,
    pub time_avg_median: f64,
    /// `max over paths of ln x(t) / t`; absent at `t = 0`.
    pub max_log_growth: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: f64,
    /// `P{|X(t)| > χ}` with the Euclidean norm.
    pub exceedance: f64,
    pub prey: SpeciesStats,
    pub predator: SpeciesStats,
}

impl Checkpoint {
    pub fn species(&self, i: usize) -> &SpeciesStats {
        if i == 0 {
            &self.prey
        } else {
            &self.predator
        }
    }
}

/// Raw per-path values at each checkpoint, surviving paths only, in path order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnsembleSamples {
    /// `[checkpoint][path]` log densities.
    pub log_states: Vec<Vec<[f64; 2]>>,
    /// `[checkpoint][path]` running time averages.
    pub time_averages: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n_paths: usize,
    pub n_diverged: usize,
    pub spec_hash: String,
    pub solver: SolverConfig,
    pub estimator: EstimatorConfig,
    pub checkpoints: Vec<Checkpoint>,
    #[serde(skip)]
    pub samples: EnsembleSamples,
}

impl EnsembleStats {
    pub fn n_surviving(&self) -> usize {
        self.n_paths - self.n_diverged
    }

    pub fn times(&self) -> Vec<f64> {
        self.checkpoints.iter().map(|c| c.t).collect()
    }

    /// Index of the checkpoint closest to `t`.
    pub fn checkpoint_near(&self, t: f64) -> usize {
        let mut best = 0;
        for (k, c) in self.checkpoints.iter().enumerate() {
            if (c.t - t).abs() < (self.checkpoints[best].t - t).abs() {
                best = k;
            }
        }
        best
    }

    pub fn final_time(&self) -> f64 {
        self.checkpoints.last().map_or(0.0, |c| c.t)
    }

    /// Densities of species `i` at checkpoint `k` over surviving paths.
    pub fn densities(&self, k: usize, i: usize) -> Vec<f64> {
        self.samples.log_states[k]
            .iter()
            .map(|x| x[i].exp())
            .collect()
    }

    /// Long-format CSV, one row per checkpoint and species.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "t,species,mean,var,q01,q50,q99")?;
        for p in &self.estimator.moments {
            write!(w, ",moment_p{p}")?;
        }
        writeln!(
            w,
            ",inv_moment_theta{},exceedance_chi{},extinct_fraction,tavg_mean,tavg_min,tavg_max,tavg_median,max_log_growth",
            self.estimator.theta, self.estimator.chi
        )?;
        for c in &self.checkpoints {
            for (name, s) in [("prey", &c.prey), ("predator", &c.predator)] {
                write!(
                    w,
                    "{},{},{},{},{},{},{}",
                    c.t, name, s.mean, s.var, s.q01, s.q50, s.q99
                )?;
                for m in &s.moments {
                    write!(w, ",{m}")?;
                }
                write!(
                    w,
                    ",{},{},{},{},{},{},{},",
                    s.inverse_moment,
                    c.exceedance,
                    s.extinct_fraction,
                    s.time_avg_mean,
                    s.time_avg_min,
                    s.time_avg_max,
                    s.time_avg_median
                )?;
                if let Some(g) = s.max_log_growth {
                    write!(w, "{g}")?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }
}

/// Linear-interpolation quantile of sorted data (type 7).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub(crate) fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Statistics grid `0, Δ, 2Δ, …` plus the horizon when it is off-grid.
pub fn checkpoint_times(horizon: f64, interval: f64) -> Vec<f64> {
    let n = (horizon / interval * (1.0 + 1e-12)).floor() as usize;
    let mut ts: Vec<f64> = (0..=n).map(|k| k as f64 * interval).collect();
    if horizon - ts[n] > 1e-9 * interval {
        ts.push(horizon);
    }
    ts
}

struct PathSummary {
    log_states: Vec<[f64; 2]>,
    time_averages: Vec<[f64; 2]>,
    diverged: bool,
}

fn run_path(
    spec: &ModelSpec,
    dynamics: &Dynamics,
    config: &SolverConfig,
    checkpoints: &[f64],
) -> Result<PathSummary> {
    let xi0 = [spec.x0[0].ln(), spec.x0[1].ln()];
    let schedule = build_schedule(spec, config.horizon, config.rng)?;
    let mut log_states = Vec::with_capacity(checkpoints.len());
    let mut time_averages = Vec::with_capacity(checkpoints.len());
    log_states.push(xi0);
    time_averages.push(spec.x0);
    let slack = 1e-6 * config.dt_max;
    let mut integral = [0.0; 2];
    let mut prev = spec.x0;
    let end = run_segments(
        dynamics,
        xi0,
        segments(config.dt_max, config.horizon, &schedule, &config.rng),
        |seg: &Segment, xi| {
            let x = [xi[0].exp(), xi[1].exp()];
            let h = seg.t1 - seg.t0;
            for i in 0..2 {
                integral[i] += 0.5 * h * (prev[i] + x[i]);
            }
            prev = x;
            if seg.cell_end {
                while log_states.len() < checkpoints.len()
                    && seg.t1 >= checkpoints[log_states.len()] - slack
                {
                    log_states.push(xi);
                    time_averages.push([integral[0] / seg.t1, integral[1] / seg.t1]);
                }
            }
        },
    )?;
    let diverged = matches!(end, PathEnd::Diverged { .. });
    if !diverged {
        // Horizon rounding can leave the last checkpoint unvisited.
        while log_states.len() < checkpoints.len() {
            let last = *log_states.last().unwrap();
            let avg = *time_averages.last().unwrap();
            log_states.push(last);
            time_averages.push(avg);
        }
    }
    Ok(PathSummary {
        log_states,
        time_averages,
        diverged,
    })
}

fn species_stats(est: &EstimatorConfig, t: f64, xis: &[f64], avgs: Vec<f64>) -> SpeciesStats {
    let n = xis.len() as f64;
    let xs: Vec<f64> = xis.iter().map(|v| v.exp()).collect();
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let moments = est
        .moments
        .iter()
        .map(|&p| xis.iter().map(|v| (p * v).exp()).sum::<f64>() / n)
        .collect();
    let inverse_moment = xis.iter().map(|v| (-est.theta * v).exp()).sum::<f64>() / n;
    let ln_thr = est.extinction_threshold.ln();
    let extinct_fraction = xis.iter().filter(|v| **v < ln_thr).count() as f64 / n;
    let max_log_growth =
        (t > 0.0).then(|| xis.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)) / t);
    let time_avg_mean = avgs.iter().sum::<f64>() / n;
    let avgs = sorted(avgs);
    let xs = sorted(xs);
    SpeciesStats {
        mean,
        var,
        q01: quantile(&xs, 0.01),
        q50: quantile(&xs, 0.5),
        q99: quantile(&xs, 0.99),
        moments,
        inverse_moment,
        extinct_fraction,
        time_avg_mean,
        time_avg_min: avgs[0],
        time_avg_max: avgs[avgs.len() - 1],
        time_avg_median: quantile(&avgs, 0.5),
        max_log_growth,
    }
}

/// Runs `n_paths` trajectories (path `k` uses RNG stream `k`) on the current
/// rayon pool and aggregates them on the statistics grid.
///
/// Per-path results are collected in index order and reduced sequentially,
/// so the output does not depend on the number of worker threads.
pub fn run_ensemble(
    spec: &ModelSpec,
    config: &SolverConfig,
    n_paths: usize,
    est: &EstimatorConfig,
) -> Result<EnsembleStats> {
    config.check()?;
    est.check()?;
    if n_paths == 0 {
        return Err(ModelError::InvalidConfig("n_paths must be >= 1".into()));
    }
    let dynamics = Dynamics::new(spec)?;
    if !(spec.x0[0] > 0.0 && spec.x0[1] > 0.0) {
        return Err(ModelError::NonPositiveState(spec.x0[0], spec.x0[1]));
    }
    let times = checkpoint_times(config.horizon, est.stats_interval);
    let paths: Vec<PathSummary> = (0..n_paths)
        .into_par_iter()
        .map(|k| {
            let mut cfg = *config;
            cfg.rng = config.rng.with_stream(k as u64);
            run_path(spec, &dynamics, &cfg, &times)
        })
        .collect::<Result<_>>()?;

    let survivors: Vec<&PathSummary> = paths.iter().filter(|p| !p.diverged).collect();
    let n_diverged = n_paths - survivors.len();
    if survivors.is_empty() {
        return Err(ModelError::AllDiverged {
            n_paths,
            dt_max: config.dt_max,
        });
    }
    let n = survivors.len() as f64;
    let mut checkpoints = Vec::with_capacity(times.len());
    let mut samples = EnsembleSamples::default();
    for (k, &t) in times.iter().enumerate() {
        let xi: Vec<[f64; 2]> = survivors.iter().map(|p| p.log_states[k]).collect();
        let avg: Vec<[f64; 2]> = survivors.iter().map(|p| p.time_averages[k]).collect();
        let chi2 = est.chi * est.chi;
        let exceed = xi
            .iter()
            .filter(|v| {
                let (a, b) = (v[0].exp(), v[1].exp());
                a * a + b * b > chi2
            })
            .count() as f64
            / n;
        let per = |i: usize| {
            let xs: Vec<f64> = xi.iter().map(|v| v[i]).collect();
            species_stats(est, t, &xs, avg.iter().map(|v| v[i]).collect())
        };
        checkpoints.push(Checkpoint {
            t,
            exceedance: exceed,
            prey: per(0),
            predator: per(1),
        });
        samples.log_states.push(xi);
        samples.time_averages.push(avg);
    }
    Ok(EnsembleStats {
        n_paths,
        n_diverged,
        spec_hash: format!("{:016x}", spec.fingerprint()),
        solver: *config,
        estimator: est.clone(),
        checkpoints,
        samples,
    })
}

/// [`run_ensemble`] on a dedicated pool of `threads` workers.
pub fn run_ensemble_with_threads(
    spec: &ModelSpec,
    config: &SolverConfig,
    n_paths: usize,
    est: &EstimatorConfig,
    threads: usize,
) -> Result<EnsembleStats> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| ModelError::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| run_ensemble(spec, config, n_paths, est))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::integrator::integrate_deterministic;
    use crate::rng::RngSpec;

    #[test]
    fn checkpoint_grid() {
        assert_eq!(checkpoint_times(3.0, 1.0), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(checkpoint_times(2.5, 1.0), vec![0.0, 1.0, 2.0, 2.5]);
        assert_eq!(checkpoint_times(0.0, 1.0), vec![0.0]);
    }

    #[test]
    fn quantile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert!((quantile(&v, 0.5) - 2.5).abs() < 1e-15);
        assert_eq!(quantile(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn single_noiseless_path_matches_rk4() {
        let spec = fixtures::oracle();
        let cfg = SolverConfig::new(1e-3, 10.0, RngSpec::new(1, 0));
        let stats = run_ensemble(&spec, &cfg, 1, &EstimatorConfig::default()).unwrap();
        let rk = integrate_deterministic(&spec, &cfg).unwrap();
        let end = stats.checkpoints.last().unwrap();
        for (i, s) in [&end.prey, &end.predator].into_iter().enumerate() {
            assert_eq!(s.q01, s.q99);
            assert_eq!(s.q01, s.mean);
            assert_eq!(s.var, 0.0);
            assert!((s.mean - rk.last()[i]).abs() / rk.last()[i] < 1e-3);
        }
    }

    #[test]
    fn constant_path_time_average_is_exact() {
        let mut spec = fixtures::logistic_prey(0.0);
        spec.x0 = [2.0, 1.0];
        spec.predator = crate::model::SpeciesParams::constant(0.0, 0.0, 0.0);
        let cfg = SolverConfig::new(1e-2, 5.0, RngSpec::new(1, 0));
        let stats = run_ensemble(&spec, &cfg, 1, &EstimatorConfig::default()).unwrap();
        let s = &stats.checkpoints.last().unwrap().prey;
        assert_eq!(s.time_avg_mean, 2.0);
        assert_eq!(s.mean, 2.0);
    }

    #[test]
    fn probabilities_and_quantiles_are_well_formed() {
        let spec = fixtures::baseline();
        let cfg = SolverConfig::new(1e-2, 5.0, RngSpec::new(3, 0));
        let stats = run_ensemble(&spec, &cfg, 64, &EstimatorConfig::default()).unwrap();
        assert_eq!(stats.checkpoints.len(), 6);
        for c in &stats.checkpoints {
            assert!((0.0..=1.0).contains(&c.exceedance));
            for s in [&c.prey, &c.predator] {
                assert!(s.q01 <= s.q50 && s.q50 <= s.q99);
                assert!((0.0..=1.0).contains(&s.extinct_fraction));
                assert!(s.time_avg_min <= s.time_avg_median && s.time_avg_median <= s.time_avg_max);
            }
        }
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let spec = fixtures::baseline();
        let cfg = SolverConfig::new(1e-2, 3.0, RngSpec::new(11, 0));
        let est = EstimatorConfig::default();
        let a = run_ensemble_with_threads(&spec, &cfg, 40, &est, 1).unwrap();
        let b = run_ensemble_with_threads(&spec, &cfg, 40, &est, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_has_two_rows_per_checkpoint() {
        let spec = fixtures::baseline();
        let cfg = SolverConfig::new(1e-2, 2.0, RngSpec::new(1, 0));
        let stats = run_ensemble(&spec, &cfg, 4, &EstimatorConfig::default()).unwrap();
        let mut buf = Vec::new();
        stats.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines
            .next()
            .unwrap()
            .starts_with("t,species,mean,var,q01,q50,q99,moment_p1,moment_p2"));
        assert_eq!(lines.count(), 2 * 3);
    }

    #[test]
    fn rejects_bad_estimator() {
        let est = EstimatorConfig {
            theta: 1.0,
            ..Default::default()
        };
        assert!(est.check().is_err());
    }
}
