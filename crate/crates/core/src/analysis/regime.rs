//! Regime classification from the sign conditions on the derived rates.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::model::{
    extremes, time_average, validate_assumptions, ModelSpec, RateKind, Species, ValidationOptions,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeLabel {
    Extinct,
    NonPersistentInMean,
    WeaklyPersistentInMean,
    StochasticallyPermanent,
    Indeterminate,
}

impl RegimeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeLabel::Extinct => "extinct",
            RegimeLabel::NonPersistentInMean => "non-persistent-in-mean",
            RegimeLabel::WeaklyPersistentInMean => "weakly-persistent-in-mean",
            RegimeLabel::StochasticallyPermanent => "stochastically-permanent",
            RegimeLabel::Indeterminate => "indeterminate",
        }
    }

    /// Labels that assert the species survives in some sense.
    pub fn is_persistent(self) -> bool {
        matches!(
            self,
            RegimeLabel::WeaklyPersistentInMean | RegimeLabel::StochasticallyPermanent
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiredRule {
    pub rule: String,
    pub species: Option<Species>,
    pub condition: String,
    /// The rate (or margin) that decided the rule.
    pub value: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Labels {
    pub prey: RegimeLabel,
    pub predator: RegimeLabel,
}

impl Labels {
    pub fn get(&self, s: Species) -> RegimeLabel {
        match s {
            Species::Prey => self.prey,
            Species::Predator => self.predator,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub p1_inf: f64,
    pub p2_inf: f64,
    /// Finite-horizon averages of `p_1`, `p_2`.
    pub pbar_star: [f64; 2],
    /// Finite-horizon averages of `q_1`, `q_2`.
    pub qbar_star: [f64; 2],
    /// Set when an infimum came from interval arithmetic (sinusoidal coefficients).
    pub extremes_conservative: bool,
    pub labels: Labels,
    /// Holds unconditionally under the standing assumptions.
    pub ultimately_bounded: bool,
    pub fired_rules: Vec<FiredRule>,
    pub averaging_horizon: f64,
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyOptions {
    /// Horizon of the time averages standing in for `limsup (1/t)∫rate`.
    pub horizon: f64,
    /// Simpson panels for the time averages.
    pub panels: usize,
    /// Sign tolerance on rates.
    pub tol: f64,
    /// Treat the predator as absent (`x_2 ≡ 0`), enabling the prey permanence rule.
    pub predator_absent: bool,
    pub allow_degenerate: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            horizon: 200.0,
            panels: 2000,
            tol: 1e-9,
            predator_absent: false,
            allow_degenerate: false,
        }
    }
}

/// Applies the sufficient conditions in order, per species:
///
/// 1. `q̄*_i < −tol` → extinct
/// 2. `|q̄*_i| <= tol` → non-persistent in the mean
/// 3. predator: `p_2,inf > tol` → stochastically permanent, else `p̄*_2 > tol` → weakly persistent in the mean
/// 4. prey: with the predator absent and `p_1,inf > tol` → stochastically permanent;
///    `p̄*_1 > tol` and `q̄*_2 < −tol` → weakly persistent in the mean
///
/// Anything else is indeterminate: the conditions are sufficient, not necessary.
pub fn classify_regime(spec: &ModelSpec, opts: &ClassifyOptions) -> Result<RegimeReport> {
    let report = validate_assumptions(
        spec,
        ValidationOptions {
            allow_degenerate: opts.allow_degenerate,
        },
    );
    if let Some(c) = report.failures().next() {
        return Err(ModelError::InvalidSpec(format!(
            "assumption clause `{}` ({}) fails: {}",
            c.id, c.condition, c.detail
        )));
    }
    classify_unchecked(spec, opts)
}

/// [`classify_regime`] without running the validator first.
pub fn classify_unchecked(spec: &ModelSpec, opts: &ClassifyOptions) -> Result<RegimeReport> {
    let tol = opts.tol;
    let avg = |k: RateKind| time_average(spec, k, opts.horizon, opts.panels);
    let p1 = extremes(spec, RateKind::P(Species::Prey))?;
    let p2 = extremes(spec, RateKind::P(Species::Predator))?;
    let pbar = [
        avg(RateKind::P(Species::Prey))?,
        avg(RateKind::P(Species::Predator))?,
    ];
    let qbar = [
        avg(RateKind::Q(Species::Prey))?,
        avg(RateKind::Q(Species::Predator))?,
    ];
    let pinf = [p1.inf, p2.inf];

    let mut fired = vec![FiredRule {
        rule: "ultimate_boundedness".into(),
        species: None,
        condition: "standing assumptions hold".into(),
        value: None,
    }];
    let mut fire = |rule: &str, sp: Species, condition: &str, value: f64| {
        fired.push(FiredRule {
            rule: rule.into(),
            species: Some(sp),
            condition: condition.into(),
            value: Some(value),
        });
    };

    let mut label_of = |sp: Species| -> RegimeLabel {
        let i = sp.index();
        let n = i + 1;
        if qbar[i] < -tol {
            fire("extinction", sp, &format!("q̄*_{n} < 0"), qbar[i]);
            return RegimeLabel::Extinct;
        }
        if qbar[i].abs() <= tol {
            fire(
                "non_persistence_in_mean",
                sp,
                &format!("q̄*_{n} = 0"),
                qbar[i],
            );
            return RegimeLabel::NonPersistentInMean;
        }
        match sp {
            Species::Predator => {
                if pinf[1] > tol {
                    fire("permanence", sp, "p_2,inf > 0", pinf[1]);
                    RegimeLabel::StochasticallyPermanent
                } else if pbar[1] > tol {
                    fire("weak_persistence_in_mean", sp, "p̄*_2 > 0", pbar[1]);
                    RegimeLabel::WeaklyPersistentInMean
                } else {
                    RegimeLabel::Indeterminate
                }
            }
            Species::Prey => {
                if opts.predator_absent && pinf[0] > tol {
                    fire("permanence", sp, "predator absent and p_1,inf > 0", pinf[0]);
                    RegimeLabel::StochasticallyPermanent
                } else if pbar[0] > tol && qbar[1] < -tol {
                    fire(
                        "weak_persistence_in_mean",
                        sp,
                        "p̄*_1 > 0 and q̄*_2 < 0",
                        pbar[0].min(-qbar[1]),
                    );
                    RegimeLabel::WeaklyPersistentInMean
                } else {
                    RegimeLabel::Indeterminate
                }
            }
        }
    };
    let labels = Labels {
        prey: label_of(Species::Prey),
        predator: label_of(Species::Predator),
    };

    Ok(RegimeReport {
        p1_inf: p1.inf,
        p2_inf: p2.inf,
        pbar_star: pbar,
        qbar_star: qbar,
        extremes_conservative: p1.conservative || p2.conservative,
        labels,
        ultimately_bounded: true,
        fired_rules: fired,
        averaging_horizon: opts.horizon,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn extinct_prey_from_large_noise() {
        let r = classify_regime(&fixtures::extinction(), &ClassifyOptions::default()).unwrap();
        assert!((r.qbar_star[0] + 0.12).abs() < 1e-15);
        assert_eq!(r.labels.prey, RegimeLabel::Extinct);
        assert!(r.fired_rules.iter().any(|f| f.rule == "extinction"));
    }

    #[test]
    fn gap_spec_is_indeterminate() {
        let r = classify_regime(&fixtures::gap(), &ClassifyOptions::default()).unwrap();
        assert!((r.qbar_star[1] - 0.0193271).abs() < 5e-8);
        assert!((r.p2_inf + 0.4806729).abs() < 5e-8);
        assert!(r.pbar_star[1] < 0.0);
        assert_eq!(r.labels.predator, RegimeLabel::Indeterminate);
    }

    #[test]
    fn large_jumps_make_predator_permanent() {
        let r = classify_regime(&fixtures::permanence(), &ClassifyOptions::default()).unwrap();
        assert!((r.p2_inf - 0.7109302).abs() < 5e-8);
        assert_eq!(r.labels.predator, RegimeLabel::StochasticallyPermanent);
    }

    #[test]
    fn zero_q_is_non_persistent() {
        let mut spec = fixtures::extinction();
        spec.prey.sigma = (0.4f64).sqrt().into(); // q_1 = 0.2 − 0.2 = 0
        let r = classify_regime(&spec, &ClassifyOptions::default()).unwrap();
        assert!(r.qbar_star[0].abs() < 1e-15);
        assert_eq!(r.labels.prey, RegimeLabel::NonPersistentInMean);
    }

    #[test]
    fn predator_absent_prey_permanence() {
        let spec = fixtures::diffusive();
        let mut opts = ClassifyOptions::default();
        assert_ne!(
            classify_regime(&spec, &opts).unwrap().labels.prey,
            RegimeLabel::StochasticallyPermanent
        );
        opts.predator_absent = true;
        assert_eq!(
            classify_regime(&spec, &opts).unwrap().labels.prey,
            RegimeLabel::StochasticallyPermanent
        );
    }

    #[test]
    fn invalid_spec_is_rejected() {
        let spec = fixtures::oracle();
        assert!(classify_regime(&spec, &ClassifyOptions::default()).is_err());
        let opts = ClassifyOptions {
            allow_degenerate: true,
            ..Default::default()
        };
        assert!(classify_regime(&spec, &opts).is_ok());
    }

    #[test]
    fn label_serialisation() {
        let s = serde_json::to_string(&RegimeLabel::WeaklyPersistentInMean).unwrap();
        assert_eq!(s, "\"weakly-persistent-in-mean\"");
    }
}
