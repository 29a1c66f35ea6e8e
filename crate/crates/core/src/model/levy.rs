//! Finite jump measures: total intensity times a normalised mark law.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::quadrature::uniform_expectation_nodes;

/// The normalised mark law `Π / Π(ℝ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MarkDistribution {
    Atom {
        z: f64,
    },
    /// `(mark, probability)` pairs.
    Discrete {
        atoms: Vec<(f64, f64)>,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
}

impl Default for MarkDistribution {
    fn default() -> Self {
        MarkDistribution::Atom { z: 0.0 }
    }
}

impl MarkDistribution {
    pub fn check(&self) -> Result<()> {
        match self {
            MarkDistribution::Atom { z } if !z.is_finite() => {
                Err(ModelError::InvalidSpec(format!("atom mark {z} not finite")))
            }
            MarkDistribution::Discrete { atoms } => {
                if atoms.is_empty() {
                    return Err(ModelError::InvalidSpec(
                        "discrete mark law has no atoms".into(),
                    ));
                }
                if atoms.iter().any(|(z, p)| !z.is_finite() || !(*p >= 0.0)) {
                    return Err(ModelError::InvalidSpec(
                        "discrete marks must be finite with non-negative probabilities".into(),
                    ));
                }
                let total: f64 = atoms.iter().map(|(_, p)| p).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(ModelError::InvalidSpec(format!(
                        "discrete mark probabilities sum to {total}, expected 1"
                    )));
                }
                Ok(())
            }
            MarkDistribution::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(ModelError::InvalidSpec(format!(
                        "uniform marks need finite lo < hi, got [{lo}, {hi}]"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `(min, max)` of the support.
    pub fn support_bounds(&self) -> (f64, f64) {
        match self {
            MarkDistribution::Atom { z } => (*z, *z),
            MarkDistribution::Discrete { atoms } => atoms
                .iter()
                .filter(|(_, p)| *p > 0.0)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (z, _)| {
                    (lo.min(*z), hi.max(*z))
                }),
            MarkDistribution::Uniform { lo, hi } => (*lo, *hi),
        }
    }

    pub fn in_support(&self, z: f64) -> bool {
        match self {
            MarkDistribution::Atom { z: z0 } => z == *z0,
            MarkDistribution::Discrete { atoms } => {
                atoms.iter().any(|(zk, p)| *zk == z && *p > 0.0)
            }
            MarkDistribution::Uniform { lo, hi } => *lo <= z && z <= *hi,
        }
    }

    /// `E[f(Z)]`: a finite sum for atomic laws, 64-node Gauss–Legendre for uniform.
    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        match self {
            MarkDistribution::Atom { z } => f(*z),
            MarkDistribution::Discrete { atoms } => atoms
                .iter()
                .filter(|(_, p)| *p > 0.0)
                .map(|(z, p)| p * f(*z))
                .sum(),
            MarkDistribution::Uniform { lo, hi } => uniform_expectation_nodes(*lo, *hi)
                .map(|(z, w)| w * f(z))
                .sum(),
        }
    }
}

/// A finite Lévy measure `Π` with `Π(ℝ) = intensity`.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct LevyMeasureSpec {
    pub intensity: f64,
    pub marks: MarkDistribution,
}

impl LevyMeasureSpec {
    pub fn new(intensity: f64, marks: MarkDistribution) -> Self {
        Self { intensity, marks }
    }

    pub fn atom(intensity: f64, z: f64) -> Self {
        Self::new(intensity, MarkDistribution::Atom { z })
    }

    pub fn none() -> Self {
        Self::atom(0.0, 0.0)
    }

    pub fn check(&self) -> Result<()> {
        if !self.intensity.is_finite() {
            return Err(ModelError::InvalidSpec(format!(
                "jump intensity {} is not finite",
                self.intensity
            )));
        }
        if self.intensity < 0.0 {
            return Err(ModelError::NegativeIntensity(self.intensity));
        }
        self.marks.check()
    }

    /// `∫ f(z) Π(dz)`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, f: F) -> f64 {
        if self.intensity == 0.0 {
            return 0.0;
        }
        self.intensity * self.marks.expect(f)
    }
}
