//! Model parameters for both species and the two jump measures.

use serde::{Deserialize, Serialize};

use super::kernel::JumpKernel;
use super::levy::LevyMeasureSpec;
use super::time_fn::TimeFunction;
use crate::error::{ModelError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Species {
    Prey,
    Predator,
}

impl Species {
    pub const BOTH: [Species; 2] = [Species::Prey, Species::Predator];

    pub fn index(self) -> usize {
        match self {
            Species::Prey => 0,
            Species::Predator => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Species::Prey => "prey",
            Species::Predator => "predator",
        }
    }
}

/// Per-species coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpeciesParams {
    /// Intrinsic rate: prey growth, predator death.
    pub a: TimeFunction,
    /// Density dependence.
    pub b: TimeFunction,
    /// Ingestion (prey) or conversion (predator) coefficient.
    pub c: TimeFunction,
    pub sigma: TimeFunction,
    /// Amplitude against the compensated measure.
    pub gamma: JumpKernel,
    /// Amplitude against the non-compensated measure.
    pub delta: JumpKernel,
}

impl SpeciesParams {
    /// Deterministic species with constant coefficients and no noise.
    pub fn constant(a: f64, b: f64, c: f64) -> Self {
        SpeciesParams {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            sigma: 0.0.into(),
            gamma: JumpKernel::zero(),
            delta: JumpKernel::zero(),
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma.into();
        self
    }

    pub fn with_gamma(mut self, gamma: JumpKernel) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_delta(mut self, delta: JumpKernel) -> Self {
        self.delta = delta;
        self
    }

    pub(crate) fn time_functions(&self) -> [&TimeFunction; 6] {
        [
            &self.a,
            &self.b,
            &self.c,
            &self.sigma,
            &self.gamma.scale,
            &self.delta.scale,
        ]
    }
}

/// Full parameter set of the jump-diffusion predator-prey system.
///
/// When `kappa` is set the predator conversion coefficient is meant to equal
/// `kappa * prey.c`; the validator checks the coupling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpecDef")]
pub struct ModelSpec {
    pub prey: SpeciesParams,
    pub predator: SpeciesParams,
    /// Half-saturation coefficient of the Holling II response.
    pub m: TimeFunction,
    pub kappa: Option<f64>,
    /// Jump measure driving the compensated (γ) terms.
    pub pi1: LevyMeasureSpec,
    /// Jump measure driving the non-compensated (δ) terms.
    pub pi2: LevyMeasureSpec,
    pub x0: [f64; 2],
}

impl ModelSpec {
    pub fn species(&self, s: Species) -> &SpeciesParams {
        match s {
            Species::Prey => &self.prey,
            Species::Predator => &self.predator,
        }
    }

    pub fn species_mut(&mut self, s: Species) -> &mut SpeciesParams {
        match s {
            Species::Prey => &mut self.prey,
            Species::Predator => &mut self.predator,
        }
    }

    /// Structural well-formedness (finite parameters, sorted breakpoints, valid mark laws).
    /// Modelling assumptions are checked separately by the validator.
    pub fn check(&self) -> Result<()> {
        for tf in self.time_functions() {
            tf.check()?;
        }
        self.pi1.check()?;
        self.pi2.check()?;
        if !self.x0.iter().all(|v| v.is_finite()) {
            return Err(ModelError::InvalidSpec(
                "initial state must be finite".into(),
            ));
        }
        if let Some(k) = self.kappa {
            if !(k.is_finite() && k > 0.0) {
                return Err(ModelError::InvalidSpec(format!(
                    "kappa must be > 0, got {k}"
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn time_functions(&self) -> Vec<&TimeFunction> {
        let mut v: Vec<&TimeFunction> = self.prey.time_functions().to_vec();
        v.extend(self.predator.time_functions());
        v.push(&self.m);
        v
    }

    /// True when no coefficient depends on time.
    pub fn is_autonomous(&self) -> bool {
        self.time_functions().iter().all(|f| f.is_constant())
    }

    /// Stable 64-bit fingerprint of the canonical JSON encoding.
    pub fn fingerprint(&self) -> u64 {
        fnv1a64(
            serde_json::to_string(self)
                .expect("spec serialises")
                .as_bytes(),
        )
    }
}

/// FNV-1a, used for provenance fingerprints of specs and configs.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpeciesDef {
    a: TimeFunction,
    b: TimeFunction,
    #[serde(default)]
    c: Option<TimeFunction>,
    #[serde(default)]
    sigma: TimeFunction,
    #[serde(default)]
    gamma: JumpKernel,
    #[serde(default)]
    delta: JumpKernel,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSpecDef {
    prey: SpeciesDef,
    predator: SpeciesDef,
    m: TimeFunction,
    #[serde(default)]
    kappa: Option<f64>,
    #[serde(default = "LevyMeasureSpec::none")]
    pi1: LevyMeasureSpec,
    #[serde(default = "LevyMeasureSpec::none")]
    pi2: LevyMeasureSpec,
    x0: [f64; 2],
}

impl TryFrom<ModelSpecDef> for ModelSpec {
    type Error = ModelError;

    fn try_from(d: ModelSpecDef) -> Result<Self> {
        let c1 = d
            .prey
            .c
            .ok_or_else(|| ModelError::InvalidSpec("prey.c is required".into()))?;
        let c2 = match (d.predator.c, d.kappa) {
            (Some(c2), _) => c2,
            (None, Some(k)) => c1.scaled(k),
            (None, None) => {
                return Err(ModelError::InvalidSpec(
                    "predator.c missing: give it explicitly or declare kappa".into(),
                ))
            }
        };
        let spec = ModelSpec {
            prey: SpeciesParams {
                a: d.prey.a,
                b: d.prey.b,
                c: c1,
                sigma: d.prey.sigma,
                gamma: d.prey.gamma,
                delta: d.prey.delta,
            },
            predator: SpeciesParams {
                a: d.predator.a,
                b: d.predator.b,
                c: c2,
                sigma: d.predator.sigma,
                gamma: d.predator.gamma,
                delta: d.predator.delta,
            },
            m: d.m,
            kappa: d.kappa,
            pi1: d.pi1,
            pi2: d.pi2,
            x0: d.x0,
        };
        spec.check()?;
        Ok(spec)
    }
}
