//! Drift of the population system in state space and in log space.

use super::rates::beta;
use super::spec::{ModelSpec, Species};
use crate::error::{ModelError, Result};

/// Holling II interaction terms `c_1 x_2 / (1 + m x_1)` and `c_2 x_1 / (1 + m x_1)`.
#[inline]
pub(crate) fn holling(c1: f64, c2: f64, m: f64, x1: f64, x2: f64) -> (f64, f64) {
    let denom = 1.0 + m * x1;
    (c1 * x2 / denom, c2 * x1 / denom)
}

/// Per-capita deterministic growth rates (the bracket multiplying `x_i`).
#[inline]
pub(crate) fn per_capita(spec: &ModelSpec, t: f64, x1: f64, x2: f64) -> [f64; 2] {
    let (p, q) = (&spec.prey, &spec.predator);
    let (eat, gain) = holling(p.c.at(t), q.c.at(t), spec.m.at(t), x1, x2);
    [
        p.a.at(t) - eat - p.b.at(t) * x1,
        -q.a.at(t) + gain - q.b.at(t) * x2,
    ]
}

/// State-space drift `x_i[(−1)^{i−1}(a_i − c_i x_{3−i}/(1 + m x_1)) − b_i x_i]`,
/// without diffusion or jump terms.
///
/// Zero densities are accepted (the boundary is invariant for the drift);
/// negative or non-finite ones are rejected.
pub fn drift_state(spec: &ModelSpec, t: f64, x: [f64; 2]) -> Result<[f64; 2]> {
    if t < 0.0 {
        return Err(ModelError::NegativeTime(t));
    }
    if !(x[0] >= 0.0 && x[1] >= 0.0 && x[0].is_finite() && x[1].is_finite()) {
        return Err(ModelError::NonPositiveState(x[0], x[1]));
    }
    Ok(drift_state_unchecked(spec, t, x))
}

#[inline]
pub(crate) fn drift_state_unchecked(spec: &ModelSpec, t: f64, x: [f64; 2]) -> [f64; 2] {
    let r = per_capita(spec, t, x[0], x[1]);
    [x[0] * r[0], x[1] * r[1]]
}

/// Drift of the log densities `ξ_i = ln x_i` when both jump terms are
/// written against compensated measures:
/// `(−1)^{i−1}(a_i − c_i e^{ξ_{3−i}}/(1 + m e^{ξ_1})) − b_i e^{ξ_i} − β_i(t)`.
pub fn drift_log(spec: &ModelSpec, t: f64, xi: [f64; 2]) -> Result<[f64; 2]> {
    if t < 0.0 {
        return Err(ModelError::NegativeTime(t));
    }
    let r = per_capita(spec, t, xi[0].exp(), xi[1].exp());
    Ok([
        r[0] - beta(spec, Species::Prey, t)?,
        r[1] - beta(spec, Species::Predator, t)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LevyMeasureSpec, SpeciesParams};

    fn oracle_spec() -> ModelSpec {
        ModelSpec {
            prey: SpeciesParams::constant(1.0, 0.5, 1.0),
            predator: SpeciesParams::constant(0.5, 0.0, 1.0),
            m: 0.5.into(),
            kappa: Some(1.0),
            pi1: LevyMeasureSpec::none(),
            pi2: LevyMeasureSpec::none(),
            x0: [1.0, 1.0],
        }
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        // x1* = a2 / (κc − a2 m) = 2/3 ; x2* = (a1 − b1 x1*)(1 + m x1*)/c = 8/9
        let d = drift_state(&oracle_spec(), 0.0, [2.0 / 3.0, 8.0 / 9.0]).unwrap();
        assert!(d[0].abs() < 1e-15 && d[1].abs() < 1e-15, "{d:?}");
    }

    #[test]
    fn absent_predator_reduces_to_logistic() {
        let spec = oracle_spec();
        let d = drift_state(&spec, 0.0, [1.5, 0.0]).unwrap();
        assert_eq!(d, [1.5 * (1.0 - 0.5 * 1.5), 0.0]);
    }

    #[test]
    fn prey_drift_arithmetic() {
        let mut spec = oracle_spec();
        spec.m = 1.0.into();
        let d = drift_state(&spec, 0.0, [1.0, 1.0]).unwrap();
        assert_eq!(d[0], 0.0);
    }

    #[test]
    fn negative_state_rejected() {
        assert!(drift_state(&oracle_spec(), 0.0, [-1.0, 1.0]).is_err());
        assert!(drift_state(&oracle_spec(), -1.0, [1.0, 1.0]).is_err());
    }

    #[test]
    fn log_drift_examples() {
        let mut zero = oracle_spec();
        zero.prey = SpeciesParams::constant(0.0, 0.0, 0.0);
        zero.predator = SpeciesParams::constant(0.0, 0.0, 0.0);
        assert_eq!(drift_log(&zero, 1.0, [0.3, -2.0]).unwrap(), [0.0, 0.0]);

        let mut spec = oracle_spec();
        spec.prey = SpeciesParams::constant(1.0, 0.5, 0.0).with_sigma(0.2);
        let d = drift_log(&spec, 0.0, [0.0, 0.0]).unwrap();
        assert!((d[0] - 0.48).abs() < 1e-15);
    }
}
