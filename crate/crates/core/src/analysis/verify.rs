//! Empirical checks of the long-run conclusions against an ensemble.
//!
//! Limits are proxied by late checkpoints: by default the half, three-quarter
//! and full horizon.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ensemble::{quantile, sorted, EnsembleStats};
use super::regime::{RegimeLabel, RegimeReport};
use crate::model::Species;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "not-applicable",
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Earliest time accepted as a proxy for `t → ∞` in the growth-rate check.
pub const LATE_TIME: f64 = 50.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogGrowthReport {
    pub t: f64,
    pub max_log_growth: [f64; 2],
    pub margin: f64,
    pub verdict: [Verdict; 2],
}

/// `max over paths of ln x_i(t)/t <= margin`; not applicable before [`LATE_TIME`].
pub fn verify_log_growth(stats: &EnsembleStats, t: f64, margin: f64) -> LogGrowthReport {
    let k = stats.checkpoint_near(t);
    let c = &stats.checkpoints[k];
    let g = [0, 1].map(|i| c.species(i).max_log_growth.unwrap_or(f64::NAN));
    let verdict = g.map(|v| {
        if c.t < LATE_TIME {
            Verdict::NotApplicable
        } else {
            Verdict::from_bool(v <= margin)
        }
    });
    LogGrowthReport {
        t: c.t,
        max_log_growth: g,
        margin,
        verdict,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeCheck {
    pub t: f64,
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub epsilon: f64,
    pub reference_t: f64,
    pub chi: f64,
    /// Exceedance `P{|X(t)| > χ}` against `ε + 2·sqrt(ε(1−ε)/n)`.
    pub checks: Vec<TimeCheck>,
    pub verdict: Verdict,
}

fn late_indices(stats: &EnsembleStats) -> (usize, Vec<usize>) {
    let h = stats.final_time();
    let r = stats.checkpoint_near(0.5 * h);
    let mut later = vec![stats.checkpoint_near(0.75 * h), stats.checkpoints.len() - 1];
    later.retain(|&k| k > r);
    later.dedup();
    (r, later)
}

fn norms(stats: &EnsembleStats, k: usize) -> Vec<f64> {
    stats.samples.log_states[k]
        .iter()
        .map(|v| v[0].exp().hypot(v[1].exp()))
        .collect()
}

/// Takes `χ(ε)` as the empirical `(1−ε)`-quantile of `|X|` at the reference
/// time and checks the exceedance stays below `ε` (plus two binomial standard
/// errors) at the later checkpoints.
pub fn verify_boundedness(stats: &EnsembleStats, epsilon: f64) -> BoundednessReport {
    let (r, later) = late_indices(stats);
    let chi = quantile(&sorted(norms(stats, r)), 1.0 - epsilon);
    let n = stats.n_surviving() as f64;
    let bound = epsilon + 2.0 * (epsilon * (1.0 - epsilon) / n).sqrt();
    let checks: Vec<TimeCheck> = later
        .iter()
        .map(|&k| {
            let v = norms(stats, k);
            let value = v.iter().filter(|x| **x > chi).count() as f64 / n;
            TimeCheck {
                t: stats.checkpoints[k].t,
                value,
                bound,
            }
        })
        .collect();
    let verdict = Verdict::from_bool(checks.iter().all(|c| c.value <= c.bound));
    BoundednessReport {
        epsilon,
        reference_t: stats.checkpoints[r].t,
        chi,
        checks,
        verdict,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermanenceReport {
    pub species: Species,
    pub epsilon: f64,
    pub reference_t: f64,
    pub h: f64,
    #[serde(rename = "H")]
    pub big_h: f64,
    /// Coverage `P{x(t) ∈ [h, H]}` against `1 − 2ε − 2·sqrt(p(1−p)/n)`.
    pub checks: Vec<TimeCheck>,
    pub verdict: Verdict,
}

/// Permanence band from the `ε` and `1−ε` quantiles at `reference_t`, then
/// coverage at each of `check_times`.
pub fn verify_permanence_at(
    stats: &EnsembleStats,
    species: Species,
    epsilon: f64,
    reference_t: f64,
    check_times: &[f64],
    applicable: bool,
) -> PermanenceReport {
    let i = species.index();
    let r = stats.checkpoint_near(reference_t);
    let xs = sorted(stats.densities(r, i));
    let h = quantile(&xs, epsilon);
    let big_h = quantile(&xs, 1.0 - epsilon);
    let n = stats.n_surviving() as f64;
    let p = 1.0 - 2.0 * epsilon;
    let bound = p - 2.0 * (p * (1.0 - p) / n).sqrt();
    let checks: Vec<TimeCheck> = check_times
        .iter()
        .map(|&t| {
            let k = stats.checkpoint_near(t);
            let inside = stats
                .densities(k, i)
                .iter()
                .filter(|x| (h..=big_h).contains(*x))
                .count();
            TimeCheck {
                t: stats.checkpoints[k].t,
                value: inside as f64 / n,
                bound,
            }
        })
        .collect();
    let verdict = if !applicable {
        Verdict::NotApplicable
    } else {
        Verdict::from_bool(checks.iter().all(|c| c.value >= c.bound))
    };
    PermanenceReport {
        species,
        epsilon,
        reference_t: stats.checkpoints[r].t,
        h,
        big_h,
        checks,
        verdict,
    }
}

/// [`verify_permanence_at`] with the band taken at a quarter of the horizon
/// and coverage checked at half and full horizon. Applicable only to a
/// species labelled stochastically permanent.
pub fn verify_permanence(
    stats: &EnsembleStats,
    report: &RegimeReport,
    species: Species,
    epsilon: f64,
) -> PermanenceReport {
    let h = stats.final_time();
    verify_permanence_at(
        stats,
        species,
        epsilon,
        0.25 * h,
        &[0.5 * h, h],
        report.labels.get(species) == RegimeLabel::StochasticallyPermanent,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionReport {
    pub t: f64,
    pub threshold: f64,
    pub fraction: [f64; 2],
}

/// Fraction of surviving paths with `x_i(T) < threshold`.
pub fn verify_extinction(stats: &EnsembleStats, threshold: f64) -> ExtinctionReport {
    let k = stats.checkpoints.len() - 1;
    let ln_thr = threshold.ln();
    let n = stats.n_surviving() as f64;
    let fraction = [0, 1].map(|i| {
        stats.samples.log_states[k]
            .iter()
            .filter(|v| v[i] < ln_thr)
            .count() as f64
            / n
    });
    ExtinctionReport {
        t: stats.checkpoints[k].t,
        threshold,
        fraction,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanPersistenceReport {
    pub t: f64,
    /// Ensemble median of the per-path time averages.
    pub median: [f64; 2],
    pub delta_np: f64,
    pub delta_wp: f64,
    pub non_persistent: [bool; 2],
    pub weakly_persistent: [bool; 2],
}

/// Per-path `(1/T)∫_0^T x_i ds` summarized by its median.
pub fn verify_mean_persistence(
    stats: &EnsembleStats,
    delta_np: f64,
    delta_wp: f64,
) -> MeanPersistenceReport {
    let c = stats.checkpoints.last().expect("ensemble has checkpoints");
    let median = [c.prey.time_avg_median, c.predator.time_avg_median];
    MeanPersistenceReport {
        t: c.t,
        median,
        delta_np,
        delta_wp,
        non_persistent: median.map(|m| m < delta_np),
        weakly_persistent: median.map(|m| m > delta_wp),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub p: f64,
    pub theta: f64,
    pub t_mid: f64,
    pub t_end: f64,
    /// Running sup of `E[x_i^p]` up to `t_mid` and `t_end`.
    pub sup_mid: [f64; 2],
    pub sup_end: [f64; 2],
    pub relative_increase: [f64; 2],
    pub verdict: [Verdict; 2],
    /// Running sup of `E[(1/x_2)^θ]`, checked only when `p_2,inf > 0`.
    pub inverse_sup_mid: f64,
    pub inverse_sup_end: f64,
    pub inverse_relative_increase: f64,
    pub inverse_verdict: Verdict,
}

/// Relative growth of a running sup above which it is not considered settled.
pub const STABILIZATION: f64 = 0.05;

/// Running sups of the moments must grow by less than 5% between half and
/// full horizon.
pub fn verify_moment_bounds(
    stats: &EnsembleStats,
    p: f64,
    theta: f64,
    p2_inf: f64,
) -> MomentReport {
    let last = stats.checkpoints.len() - 1;
    let mid = stats.checkpoint_near(0.5 * stats.final_time());
    let series = |f: &dyn Fn(&[f64; 2]) -> f64| -> Vec<f64> {
        stats
            .samples
            .log_states
            .iter()
            .map(|xs| xs.iter().map(f).sum::<f64>() / xs.len() as f64)
            .collect()
    };
    let running_sup =
        |s: &[f64], k: usize| s[..=k].iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    let rel = |a: f64, b: f64| if a > 0.0 { (b - a) / a } else { 0.0 };
    let mut sup_mid = [0.0; 2];
    let mut sup_end = [0.0; 2];
    for i in 0..2 {
        let s = series(&|v: &[f64; 2]| (p * v[i]).exp());
        sup_mid[i] = running_sup(&s, mid);
        sup_end[i] = running_sup(&s, last);
    }
    let relative_increase = [0, 1].map(|i| rel(sup_mid[i], sup_end[i]));
    let inv = series(&|v: &[f64; 2]| (-theta * v[1]).exp());
    let (inv_mid, inv_end) = (running_sup(&inv, mid), running_sup(&inv, last));
    let inv_rel = rel(inv_mid, inv_end);
    MomentReport {
        p,
        theta,
        t_mid: stats.checkpoints[mid].t,
        t_end: stats.checkpoints[last].t,
        sup_mid,
        sup_end,
        relative_increase,
        verdict: relative_increase.map(|r| Verdict::from_bool(r < STABILIZATION)),
        inverse_sup_mid: inv_mid,
        inverse_sup_end: inv_end,
        inverse_relative_increase: inv_rel,
        inverse_verdict: if p2_inf > 0.0 {
            Verdict::from_bool(inv_rel < STABILIZATION)
        } else {
            Verdict::NotApplicable
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    pub epsilon: f64,
    pub log_growth_margin: f64,
    pub moment_p: f64,
    pub delta_np: f64,
    pub delta_wp: f64,
    /// Minimum fraction below the threshold for an extinction pass.
    pub extinction_fraction: f64,
    /// Ensembles smaller than this are flagged low-power.
    pub min_paths: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            epsilon: 0.05,
            log_growth_margin: 0.05,
            moment_p: 2.0,
            delta_np: 0.01,
            delta_wp: 0.05,
            extinction_fraction: 0.95,
            min_paths: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictEntry {
    pub verdict: Verdict,
    pub value: Option<f64>,
    pub low_power: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationSuite {
    pub verdicts: BTreeMap<String, VerdictEntry>,
    pub log_growth: LogGrowthReport,
    pub boundedness: BoundednessReport,
    pub permanence: PermanenceReport,
    pub extinction: ExtinctionReport,
    pub mean_persistence: MeanPersistenceReport,
    pub moments: MomentReport,
}

/// Runs every check and maps each conclusion id to a verdict. Checks whose
/// hypothesis the classifier did not establish are not applicable.
pub fn verify_all(
    stats: &EnsembleStats,
    report: &RegimeReport,
    opts: &VerifyOptions,
) -> VerificationSuite {
    let low_power = stats.n_surviving() < opts.min_paths;
    let log_growth = verify_log_growth(stats, stats.final_time(), opts.log_growth_margin);
    let boundedness = verify_boundedness(stats, opts.epsilon);
    let permanence = verify_permanence(stats, report, Species::Predator, opts.epsilon);
    let extinction = verify_extinction(stats, stats.estimator.extinction_threshold);
    let mean_persistence = verify_mean_persistence(stats, opts.delta_np, opts.delta_wp);
    let moments = verify_moment_bounds(stats, opts.moment_p, stats.estimator.theta, report.p2_inf);

    let mut verdicts = BTreeMap::new();
    let mut put = |id: String, verdict: Verdict, value: Option<f64>| {
        verdicts.insert(
            id,
            VerdictEntry {
                verdict,
                value: value.filter(|v| v.is_finite()),
                low_power,
            },
        );
    };
    put(
        "ultimate_boundedness".into(),
        boundedness.verdict,
        Some(boundedness.chi),
    );
    for sp in Species::BOTH {
        let i = sp.index();
        let name = sp.name();
        let label = report.labels.get(sp);
        put(
            format!("log_growth.{name}"),
            log_growth.verdict[i],
            Some(log_growth.max_log_growth[i]),
        );
        put(
            format!("moment_bound.{name}"),
            moments.verdict[i],
            Some(moments.relative_increase[i]),
        );
        let ext = if label == RegimeLabel::Extinct {
            Verdict::from_bool(extinction.fraction[i] >= opts.extinction_fraction)
        } else {
            Verdict::NotApplicable
        };
        put(
            format!("extinction.{name}"),
            ext,
            Some(extinction.fraction[i]),
        );
        let np = if label == RegimeLabel::NonPersistentInMean {
            Verdict::from_bool(mean_persistence.non_persistent[i])
        } else {
            Verdict::NotApplicable
        };
        put(
            format!("non_persistence.{name}"),
            np,
            Some(mean_persistence.median[i]),
        );
        let wp = if label == RegimeLabel::WeaklyPersistentInMean {
            Verdict::from_bool(mean_persistence.weakly_persistent[i])
        } else {
            Verdict::NotApplicable
        };
        put(
            format!("weak_persistence.{name}"),
            wp,
            Some(mean_persistence.median[i]),
        );
    }
    let worst = permanence
        .checks
        .iter()
        .map(|c| c.value)
        .fold(f64::INFINITY, f64::min);
    put(
        "permanence.predator".into(),
        permanence.verdict,
        Some(worst),
    );
    put(
        "inverse_moment.predator".into(),
        moments.inverse_verdict,
        Some(moments.inverse_relative_increase),
    );
    VerificationSuite {
        verdicts,
        log_growth,
        boundedness,
        permanence,
        extinction,
        mean_persistence,
        moments,
    }
}
