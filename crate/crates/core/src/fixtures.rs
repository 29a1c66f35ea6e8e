//! Reference parameter sets and random spec generators.

use std::f64::consts::PI;

use rand::Rng;

use crate::model::{
    JumpKernel, LevyMeasureSpec, MarkDistribution, ModelSpec, Shape, SpeciesParams, TimeFunction,
};

/// Moderate noise, both jump types, all assumptions satisfied.
pub fn baseline() -> ModelSpec {
    let small = JumpKernel::new(TimeFunction::constant(0.1), Shape::Identity);
    ModelSpec {
        prey: SpeciesParams::constant(1.0, 0.5, 1.0)
            .with_sigma(0.2)
            .with_gamma(small.clone())
            .with_delta(JumpKernel::constant(-0.05)),
        predator: SpeciesParams::constant(0.5, 0.1, 1.0)
            .with_sigma(0.2)
            .with_gamma(small)
            .with_delta(JumpKernel::constant(-0.05)),
        m: 0.5.into(),
        kappa: Some(1.0),
        pi1: LevyMeasureSpec::new(2.0, MarkDistribution::Uniform { lo: -1.0, hi: 1.0 }),
        pi2: LevyMeasureSpec::atom(1.0, 1.0),
        x0: [1.0, 1.0],
    }
}

/// Deterministic Rosenzweig–MacArthur parameters with `b_2 = 0`; stable
/// interior equilibrium at `(2/3, 8/9)`.
pub fn oracle() -> ModelSpec {
    ModelSpec {
        prey: SpeciesParams::constant(1.0, 0.5, 1.0),
        predator: SpeciesParams::constant(0.5, 0.0, 1.0),
        m: 0.5.into(),
        kappa: Some(1.0),
        pi1: LevyMeasureSpec::none(),
        pi2: LevyMeasureSpec::none(),
        x0: [1.0, 0.5],
    }
}

pub const ORACLE_EQUILIBRIUM: [f64; 2] = [2.0 / 3.0, 8.0 / 9.0];

/// Prey logistic growth with carrying capacity 2 and no predation.
pub fn logistic_prey(sigma: f64) -> ModelSpec {
    ModelSpec {
        prey: SpeciesParams::constant(1.0, 0.5, 0.0).with_sigma(sigma),
        predator: SpeciesParams::constant(0.5, 0.5, 0.0),
        m: 1.0.into(),
        kappa: None,
        pi1: LevyMeasureSpec::none(),
        pi2: LevyMeasureSpec::none(),
        x0: [1.0, 1.0],
    }
}

/// Linear prey driven only by compensated jumps: `γ_1 ≡ 0.1`, `λ_1 = 2`.
/// The predator is frozen (all coefficients zero).
pub fn pure_jump() -> ModelSpec {
    ModelSpec {
        prey: SpeciesParams::constant(0.0, 0.0, 0.0).with_gamma(JumpKernel::constant(0.1)),
        predator: SpeciesParams::constant(0.0, 0.0, 0.0),
        m: 1.0.into(),
        kappa: None,
        pi1: LevyMeasureSpec::atom(2.0, 0.0),
        pi2: LevyMeasureSpec::none(),
        x0: [1.0, 1.0],
    }
}

/// Baseline coefficients with Brownian noise only.
pub fn diffusive() -> ModelSpec {
    ModelSpec {
        prey: SpeciesParams::constant(1.0, 0.5, 1.0).with_sigma(0.2),
        predator: SpeciesParams::constant(0.5, 0.1, 1.0).with_sigma(0.2),
        m: 0.5.into(),
        kappa: Some(1.0),
        pi1: LevyMeasureSpec::none(),
        pi2: LevyMeasureSpec::none(),
        x0: [1.0, 1.0],
    }
}

/// Prey with `q_1 = a_1 − σ_1²/2 = 0.2 − 0.32 = −0.12`; the predator also has `q_2 < 0`.
pub fn extinction() -> ModelSpec {
    ModelSpec {
        prey: SpeciesParams::constant(0.2, 1.0, 1.0).with_sigma(0.8),
        predator: SpeciesParams::constant(0.6, 0.5, 0.5).with_sigma(0.2),
        m: 1.0.into(),
        kappa: Some(0.5),
        pi1: LevyMeasureSpec::none(),
        pi2: LevyMeasureSpec::none(),
        x0: [1.0, 1.0],
    }
}

/// Predator with `δ_2 ≡ 0.5` at rate 2 and `a_2 = 0.1`, so
/// `p_2 = −0.1 + 2 ln 1.5 ≈ 0.7109 > 0`.
pub fn permanence() -> ModelSpec {
    ModelSpec {
        prey: SpeciesParams::constant(1.0, 0.5, 1.0).with_sigma(0.2),
        predator: SpeciesParams::constant(0.1, 0.5, 1.0).with_delta(JumpKernel::constant(0.5)),
        m: 0.5.into(),
        kappa: Some(1.0),
        pi1: LevyMeasureSpec::none(),
        pi2: LevyMeasureSpec::atom(2.0, 0.0),
        x0: [1.0, 1.0],
    }
}

/// Rates fall between the sufficient conditions: `q_2 ≈ 0.0193 > 0` but `p_2 < 0`.
pub fn gap() -> ModelSpec {
    let species = |a: f64, c: f64| {
        SpeciesParams::constant(a, 0.5, c)
            .with_sigma(0.2)
            .with_gamma(JumpKernel::constant(0.1))
            .with_delta(JumpKernel::constant(-0.05))
    };
    ModelSpec {
        prey: species(1.0, 0.5),
        predator: species(0.4, 1.0),
        m: 2.0.into(),
        kappa: Some(2.0),
        pi1: LevyMeasureSpec::atom(2.0, 0.0),
        pi2: LevyMeasureSpec::atom(1.0, 0.0),
        x0: [1.0, 1.0],
    }
}

/// Looks up a preset by name.
pub fn by_name(name: &str) -> Option<ModelSpec> {
    Some(match name {
        "baseline" => baseline(),
        "oracle" => oracle(),
        "logistic" => logistic_prey(0.0),
        "pure_jump" => pure_jump(),
        "diffusive" => diffusive(),
        "extinction" => extinction(),
        "permanence" => permanence(),
        "gap" => gap(),
        _ => return None,
    })
}

pub const PRESET_NAMES: [&str; 8] = [
    "baseline",
    "oracle",
    "logistic",
    "pure_jump",
    "diffusive",
    "extinction",
    "permanence",
    "gap",
];

fn random_marks<R: Rng + ?Sized>(rng: &mut R) -> MarkDistribution {
    match rng.random_range(0..3) {
        0 => MarkDistribution::Atom {
            z: rng.random_range(-1.0..1.0),
        },
        1 => {
            let p = rng.random_range(0.05..0.95);
            MarkDistribution::Discrete {
                atoms: vec![
                    (rng.random_range(-1.0..0.0), p),
                    (rng.random_range(0.0..1.0), 1.0 - p),
                ],
            }
        }
        _ => {
            let lo = rng.random_range(-1.0..0.5);
            MarkDistribution::Uniform {
                lo,
                hi: lo + rng.random_range(0.1..1.0),
            }
        }
    }
}

/// Kernel whose amplitude stays in `(−0.6, 0.9)` over the mark support in `[−1, 1.5]`.
fn random_kernel<R: Rng + ?Sized>(rng: &mut R, time_varying: bool) -> JumpKernel {
    let scale = if time_varying && rng.random_bool(0.3) {
        let a = rng.random_range(0.0..0.3);
        TimeFunction::sinusoidal(
            rng.random_range(-0.3..0.3),
            a,
            rng.random_range(0.2..3.0),
            0.0,
        )
    } else {
        TimeFunction::constant(rng.random_range(-0.4..0.6))
    };
    let shape = match rng.random_range(0..3) {
        0 => Shape::Constant { value: 1.0 },
        1 => Shape::Identity,
        _ => Shape::Affine {
            intercept: rng.random_range(-0.2..0.2),
            slope: rng.random_range(-0.2..0.2),
        },
    };
    JumpKernel::new(scale, shape)
}

fn random_positive<R: Rng + ?Sized>(
    rng: &mut R,
    lo: f64,
    hi: f64,
    time_varying: bool,
) -> TimeFunction {
    let base = rng.random_range(lo..hi);
    if !time_varying {
        return TimeFunction::constant(base);
    }
    match rng.random_range(0..4) {
        0 => TimeFunction::sinusoidal(
            base,
            rng.random_range(0.0..0.9) * (base - 0.5 * lo),
            rng.random_range(0.1..2.0 * PI),
            rng.random_range(0.0..2.0 * PI),
        ),
        1 => TimeFunction::piecewise(vec![
            (0.0, base),
            (rng.random_range(1.0..10.0), rng.random_range(lo..hi)),
        ]),
        _ => TimeFunction::constant(base),
    }
}

fn random_species<R: Rng + ?Sized>(rng: &mut R, time_varying: bool) -> SpeciesParams {
    SpeciesParams {
        a: random_positive(rng, 0.05, 2.0, time_varying),
        b: random_positive(rng, 0.05, 2.0, time_varying),
        c: random_positive(rng, 0.05, 2.0, time_varying),
        sigma: random_positive(rng, 0.0, 1.0, time_varying),
        gamma: random_kernel(rng, time_varying),
        delta: random_kernel(rng, time_varying),
    }
}

fn random_spec<R: Rng + ?Sized>(rng: &mut R, time_varying: bool) -> ModelSpec {
    let prey = random_species(rng, time_varying);
    let predator = random_species(rng, time_varying);
    ModelSpec {
        prey,
        predator,
        m: random_positive(rng, 0.1, 2.0, time_varying),
        kappa: None,
        pi1: LevyMeasureSpec::new(rng.random_range(0.0..3.0), random_marks(rng)),
        pi2: LevyMeasureSpec::new(rng.random_range(0.0..3.0), random_marks(rng)),
        x0: [rng.random_range(0.1..3.0), rng.random_range(0.1..3.0)],
    }
}

/// A random spec satisfying every validator clause; coefficients may be
/// sinusoidal or piecewise in time.
pub fn random_valid<R: Rng + ?Sized>(rng: &mut R) -> ModelSpec {
    random_spec(rng, true)
}

/// A random valid spec with all coefficients constant in time.
pub fn random_constant<R: Rng + ?Sized>(rng: &mut R) -> ModelSpec {
    random_spec(rng, false)
}
