//! Jump amplitude kernels `γ_i(t, z)`, `δ_i(t, z)` and their integrals against a jump measure.

use serde::{Deserialize, Serialize};

use super::levy::{LevyMeasureSpec, MarkDistribution};
use super::time_fn::TimeFunction;
use crate::error::{ModelError, Result};

/// Mark dependence of a jump amplitude.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Identity,
    Constant {
        value: f64,
    },
    /// `intercept + slope * z`
    Affine {
        intercept: f64,
        slope: f64,
    },
}

impl Shape {
    #[inline]
    pub fn at(&self, z: f64) -> f64 {
        match self {
            Shape::Identity => z,
            Shape::Constant { value } => *value,
            Shape::Affine { intercept, slope } => intercept + slope * z,
        }
    }

    /// Exact range of the shape over the support of `marks` (shapes are affine).
    pub fn range_over(&self, marks: &MarkDistribution) -> (f64, f64) {
        match marks {
            MarkDistribution::Discrete { atoms } => atoms
                .iter()
                .filter(|(_, p)| *p > 0.0)
                .map(|(z, _)| self.at(*z))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                }),
            _ => {
                let (lo, hi) = marks.support_bounds();
                let (a, b) = (self.at(lo), self.at(hi));
                (a.min(b), a.max(b))
            }
        }
    }
}

/// Amplitude `scale(t) * shape(z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpKernel {
    pub scale: TimeFunction,
    pub shape: Shape,
}

impl Default for JumpKernel {
    fn default() -> Self {
        JumpKernel::zero()
    }
}

/// Integrand applied to the amplitude inside `∫ transform(γ(t,z)) Π(dz)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Transform {
    /// `γ`
    Identity,
    /// `ln(1 + γ)`
    Log1p,
    /// `γ - ln(1 + γ)`
    XMinusLog1p,
    /// `(1 + γ)^p - 1`
    Power(f64),
    /// `(1 + γ)^p - 1 - pγ`
    PowerMinusOne(f64),
}

impl Transform {
    #[inline]
    pub fn apply(self, g: f64) -> f64 {
        match self {
            Transform::Identity => g,
            Transform::Log1p => g.ln_1p(),
            Transform::XMinusLog1p => g - g.ln_1p(),
            Transform::Power(1.0) => g,
            Transform::Power(p) => (p * g.ln_1p()).exp_m1(),
            Transform::PowerMinusOne(1.0) => 0.0,
            Transform::PowerMinusOne(p) => (p * g.ln_1p()).exp_m1() - p * g,
        }
    }
}

impl JumpKernel {
    pub fn zero() -> Self {
        JumpKernel {
            scale: TimeFunction::constant(0.0),
            shape: Shape::Constant { value: 0.0 },
        }
    }

    /// Mark-independent amplitude `γ(t, z) ≡ value`.
    pub fn constant(value: f64) -> Self {
        JumpKernel {
            scale: TimeFunction::constant(value),
            shape: Shape::Constant { value: 1.0 },
        }
    }

    pub fn new(scale: TimeFunction, shape: Shape) -> Self {
        JumpKernel { scale, shape }
    }

    #[inline]
    pub fn amplitude(&self, t: f64, z: f64) -> f64 {
        self.scale.at(t) * self.shape.at(z)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.scale, TimeFunction::Constant { value } if value == 0.0)
            || matches!(self.shape, Shape::Constant { value } if value == 0.0)
    }

    /// `∫ shape(z) Π(dz)`; the identity-transform integral is `scale(t)` times this.
    pub fn shape_mass(&self, measure: &LevyMeasureSpec) -> f64 {
        measure.integrate(|z| self.shape.at(z))
    }

    /// Range of `γ(t, z)` over all `t >= 0` and all marks in the support.
    pub fn amplitude_bounds(&self, marks: &MarkDistribution) -> (f64, f64) {
        let (s_lo, s_hi) = self.scale.extremes();
        let (h_lo, h_hi) = self.shape.range_over(marks);
        let corners = [s_lo * h_lo, s_lo * h_hi, s_hi * h_lo, s_hi * h_hi];
        corners
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(*v), hi.max(*v))
            })
    }

    /// Smallest amplitude over the support at time `t`, with the mark attaining it.
    fn min_amplitude_at(&self, t: f64, marks: &MarkDistribution) -> (f64, f64) {
        let s = self.scale.at(t);
        let candidates: Vec<f64> = match marks {
            MarkDistribution::Atom { z } => vec![*z],
            MarkDistribution::Discrete { atoms } => atoms
                .iter()
                .filter(|(_, p)| *p > 0.0)
                .map(|(z, _)| *z)
                .collect(),
            MarkDistribution::Uniform { lo, hi } => vec![*lo, *hi],
        };
        candidates
            .into_iter()
            .map(|z| (s * self.shape.at(z), z))
            .fold(
                (f64::INFINITY, f64::NAN),
                |acc, c| if c.0 < acc.0 { c } else { acc },
            )
    }

    /// Errors if `1 + γ(t, z) <= 0` somewhere on the support at time `t`.
    pub fn check_domain_at(&self, t: f64, marks: &MarkDistribution) -> Result<()> {
        let (amp, z) = self.min_amplitude_at(t, marks);
        if amp <= -1.0 {
            return Err(ModelError::KernelDomain {
                t,
                z,
                amplitude: amp,
            });
        }
        Ok(())
    }
}

/// `∫ transform(γ(t, z)) Π(dz)`: exact finite sum for atomic marks,
/// 64-node Gauss–Legendre for uniform marks.
pub fn jump_integral(
    kernel: &JumpKernel,
    measure: &LevyMeasureSpec,
    t: f64,
    transform: Transform,
) -> Result<f64> {
    if t < 0.0 {
        return Err(ModelError::NegativeTime(t));
    }
    if measure.intensity == 0.0 {
        return Ok(0.0);
    }
    kernel.check_domain_at(t, &measure.marks)?;
    let scale = kernel.scale.at(t);
    Ok(measure.integrate(|z| transform.apply(scale * kernel.shape.at(z))))
}
