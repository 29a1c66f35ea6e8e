//! Bounded coefficient functions of time.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// A bounded coefficient `f(t)`, `t >= 0`.
///
/// Piecewise-constant functions are right-continuous: on `[b_k, b_{k+1})`
/// the value is `v_k` and the last value extends to infinity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeFunction {
    Constant {
        value: f64,
    },
    /// `offset + amplitude * sin(omega * t + phase)`
    Sinusoidal {
        offset: f64,
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
    /// `(breakpoint, value)` pairs with strictly increasing breakpoints, the first at 0.
    Piecewise {
        pieces: Vec<(f64, f64)>,
    },
}

impl Default for TimeFunction {
    fn default() -> Self {
        TimeFunction::Constant { value: 0.0 }
    }
}

impl From<f64> for TimeFunction {
    fn from(value: f64) -> Self {
        TimeFunction::Constant { value }
    }
}

impl TimeFunction {
    pub fn constant(value: f64) -> Self {
        TimeFunction::Constant { value }
    }

    pub fn sinusoidal(offset: f64, amplitude: f64, omega: f64, phase: f64) -> Self {
        TimeFunction::Sinusoidal {
            offset,
            amplitude,
            omega,
            phase,
        }
    }

    pub fn piecewise(pieces: Vec<(f64, f64)>) -> Self {
        TimeFunction::Piecewise { pieces }
    }

    /// Structural checks: finite parameters, positive frequency, sorted breakpoints.
    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(ModelError::InvalidSpec(msg));
        match self {
            TimeFunction::Constant { value } => {
                if !value.is_finite() {
                    return bad(format!("constant value {value} is not finite"));
                }
            }
            TimeFunction::Sinusoidal {
                offset,
                amplitude,
                omega,
                phase,
            } => {
                if ![offset, amplitude, omega, phase]
                    .iter()
                    .all(|v| v.is_finite())
                {
                    return bad("sinusoid parameters must be finite".into());
                }
                if *omega <= 0.0 {
                    return bad(format!(
                        "sinusoid angular frequency must be > 0, got {omega}"
                    ));
                }
            }
            TimeFunction::Piecewise { pieces } => {
                if pieces.is_empty() {
                    return bad("piecewise function needs at least one piece".into());
                }
                if pieces[0].0 != 0.0 {
                    return bad(format!("first breakpoint must be 0, got {}", pieces[0].0));
                }
                for w in pieces.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return bad("piecewise breakpoints must be strictly increasing".into());
                    }
                }
                if !pieces.iter().all(|(b, v)| b.is_finite() && v.is_finite()) {
                    return bad("piecewise breakpoints and values must be finite".into());
                }
            }
        }
        Ok(())
    }

    /// `f(t)`; errors on negative time.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(ModelError::NegativeTime(t));
        }
        Ok(self.at(t))
    }

    /// `f(t)` without the domain check. Hot-path variant for the integrator.
    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        match self {
            TimeFunction::Constant { value } => *value,
            TimeFunction::Sinusoidal {
                offset,
                amplitude,
                omega,
                phase,
            } => offset + amplitude * (omega * t + phase).sin(),
            TimeFunction::Piecewise { pieces } => {
                // index of the last breakpoint <= t
                let idx = pieces.partition_point(|(b, _)| *b <= t);
                pieces[idx.saturating_sub(1)].1
            }
        }
    }

    /// Exact `(inf, sup)` over `[0, inf)`.
    pub fn extremes(&self) -> (f64, f64) {
        match self {
            TimeFunction::Constant { value } => (*value, *value),
            TimeFunction::Sinusoidal {
                offset, amplitude, ..
            } => (offset - amplitude.abs(), offset + amplitude.abs()),
            TimeFunction::Piecewise { pieces } => pieces
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| {
                    (lo.min(*v), hi.max(*v))
                }),
        }
    }

    /// Exact `∫_{t0}^{t1} f(s) ds` for `0 <= t0 <= t1`.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        match self {
            TimeFunction::Constant { value } => value * (t1 - t0),
            TimeFunction::Sinusoidal {
                offset,
                amplitude,
                omega,
                phase,
            } => {
                offset * (t1 - t0)
                    + amplitude / omega * ((omega * t0 + phase).cos() - (omega * t1 + phase).cos())
            }
            TimeFunction::Piecewise { pieces } => {
                let mut total = 0.0;
                for (k, (start, v)) in pieces.iter().enumerate() {
                    let end = pieces.get(k + 1).map_or(f64::INFINITY, |p| p.0);
                    let lo = start.max(t0);
                    let hi = end.min(t1);
                    if hi > lo {
                        total += v * (hi - lo);
                    }
                }
                total
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            TimeFunction::Constant { .. } => true,
            TimeFunction::Sinusoidal { amplitude, .. } => *amplitude == 0.0,
            TimeFunction::Piecewise { pieces } => pieces.iter().all(|(_, v)| *v == pieces[0].1),
        }
    }

    pub fn is_sinusoidal(&self) -> bool {
        matches!(self, TimeFunction::Sinusoidal { amplitude, .. } if *amplitude != 0.0)
    }

    pub fn is_piecewise(&self) -> bool {
        matches!(self, TimeFunction::Piecewise { .. })
    }

    /// Breakpoints where the function may jump (empty unless piecewise).
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            TimeFunction::Piecewise { pieces } => pieces.iter().map(|(b, _)| *b).collect(),
            _ => Vec::new(),
        }
    }

    /// `k * f(t)` in the same family.
    pub fn scaled(&self, k: f64) -> TimeFunction {
        match self {
            TimeFunction::Constant { value } => TimeFunction::Constant { value: k * value },
            TimeFunction::Sinusoidal {
                offset,
                amplitude,
                omega,
                phase,
            } => TimeFunction::Sinusoidal {
                offset: k * offset,
                amplitude: k * amplitude,
                omega: *omega,
                phase: *phase,
            },
            TimeFunction::Piecewise { pieces } => TimeFunction::Piecewise {
                pieces: pieces.iter().map(|(b, v)| (*b, k * v)).collect(),
            },
        }
    }

    /// A horizon long enough to see every distinct value of the function:
    /// two periods for sinusoids, past the last breakpoint for piecewise.
    pub(crate) fn characteristic_span(&self) -> f64 {
        match self {
            TimeFunction::Constant { .. } => 1.0,
            TimeFunction::Sinusoidal { omega, .. } => 4.0 * std::f64::consts::PI / omega,
            TimeFunction::Piecewise { pieces } => pieces.last().map_or(1.0, |p| p.0 + 1.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn eval_examples() {
        assert_eq!(TimeFunction::constant(0.5).eval(7.0).unwrap(), 0.5);
        let s = TimeFunction::sinusoidal(1.0, 0.2, PI, 0.0);
        assert!((s.eval(0.5).unwrap() - 1.2).abs() < 1e-15);
        let p = TimeFunction::piecewise(vec![(0.0, 1.0), (5.0, 2.0)]);
        assert_eq!(p.eval(5.0).unwrap(), 2.0);
        assert_eq!(p.eval(4.999).unwrap(), 1.0);
        assert_eq!(p.eval(1e9).unwrap(), 2.0);
    }

    #[test]
    fn negative_time_is_a_domain_error() {
        assert_eq!(
            TimeFunction::constant(1.0).eval(-0.1),
            Err(ModelError::NegativeTime(-0.1))
        );
    }

    #[test]
    fn extremes_by_kind() {
        assert_eq!(TimeFunction::constant(3.0).extremes(), (3.0, 3.0));
        assert_eq!(
            TimeFunction::sinusoidal(1.0, -0.25, 2.0, 0.3).extremes(),
            (0.75, 1.25)
        );
        assert_eq!(
            TimeFunction::piecewise(vec![(0.0, 1.0), (2.0, -1.0), (3.0, 4.0)]).extremes(),
            (-1.0, 4.0)
        );
    }

    #[test]
    fn integrals_are_exact() {
        let s = TimeFunction::sinusoidal(-0.1, 0.2, 2.0 * PI, 0.0);
        assert!((s.integral(0.0, 1.0) + 0.1).abs() < 1e-15);
        let p = TimeFunction::piecewise(vec![(0.0, 1.0), (5.0, 2.0)]);
        assert_eq!(p.integral(4.0, 7.0), 1.0 + 4.0);
        assert_eq!(TimeFunction::constant(2.0).integral(1.0, 4.0), 6.0);
    }

    #[test]
    fn structural_checks() {
        assert!(TimeFunction::sinusoidal(1.0, 0.1, 0.0, 0.0)
            .check()
            .is_err());
        assert!(TimeFunction::piecewise(vec![]).check().is_err());
        assert!(TimeFunction::piecewise(vec![(1.0, 1.0)]).check().is_err());
        assert!(TimeFunction::piecewise(vec![(0.0, 1.0), (0.0, 2.0)])
            .check()
            .is_err());
        assert!(TimeFunction::piecewise(vec![(0.0, 1.0), (1.0, 2.0)])
            .check()
            .is_ok());
    }

    #[test]
    fn serde_shape() {
        let s = TimeFunction::sinusoidal(1.0, 0.2, 3.0, 0.0);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(
            j,
            r#"{"kind":"sinusoidal","offset":1.0,"amplitude":0.2,"omega":3.0,"phase":0.0}"#
        );
        let back: TimeFunction = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }
}
