//! Derived rates α_i, β_i, p_i, q_i, their time averages and extremes.

use serde::{Deserialize, Serialize};

use super::kernel::{jump_integral, JumpKernel, Transform};
use super::levy::LevyMeasureSpec;
use super::spec::{ModelSpec, Species};
use super::time_fn::TimeFunction;
use crate::error::{ModelError, Result};

/// Which derived rate to evaluate.
///
/// * `Alpha`: `a_i + ∫δ_i Π_2`
/// * `Beta`: `σ_i²/2 + ∫[γ_i − ln(1+γ_i)] Π_1 − ∫ln(1+δ_i) Π_2`
/// * `P`: `a_1 − β_1` (prey), `−a_2 − β_2` (predator)
/// * `Q`: `a_1 − β_1` (prey), `−a_2 + c_2/m − β_2` (predator)
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "rate", content = "species", rename_all = "snake_case")]
pub enum RateKind {
    Alpha(Species),
    Beta(Species),
    P(Species),
    Q(Species),
}

impl RateKind {
    pub fn species(self) -> Species {
        match self {
            RateKind::Alpha(s) | RateKind::Beta(s) | RateKind::P(s) | RateKind::Q(s) => s,
        }
    }

    /// Coefficients the rate depends on.
    fn components(self, spec: &ModelSpec) -> Vec<&TimeFunction> {
        let s = spec.species(self.species());
        let mut v = vec![&s.a];
        match self {
            RateKind::Alpha(_) => v.push(&s.delta.scale),
            _ => {
                v.extend([&s.sigma, &s.gamma.scale, &s.delta.scale]);
                if self == RateKind::Q(Species::Predator) {
                    v.extend([&s.c, &spec.m]);
                }
            }
        }
        v
    }
}

/// `β_i(t)`.
pub fn beta(spec: &ModelSpec, species: Species, t: f64) -> Result<f64> {
    let s = spec.species(species);
    let sigma = s.sigma.eval(t)?;
    let small = jump_integral(&s.gamma, &spec.pi1, t, Transform::XMinusLog1p)?;
    let large = jump_integral(&s.delta, &spec.pi2, t, Transform::Log1p)?;
    Ok(0.5 * sigma * sigma + small - large)
}

/// Evaluates the named rate at time `t`.
pub fn derived_rate(spec: &ModelSpec, kind: RateKind, t: f64) -> Result<f64> {
    let sp = kind.species();
    let s = spec.species(sp);
    let a = s.a.eval(t)?;
    Ok(match kind {
        RateKind::Alpha(_) => a + jump_integral(&s.delta, &spec.pi2, t, Transform::Identity)?,
        RateKind::Beta(_) => beta(spec, sp, t)?,
        RateKind::P(Species::Prey) | RateKind::Q(Species::Prey) => a - beta(spec, sp, t)?,
        RateKind::P(Species::Predator) => -a - beta(spec, sp, t)?,
        RateKind::Q(Species::Predator) => -a + s.c.at(t) / spec.m.at(t) - beta(spec, sp, t)?,
    })
}

/// True when the named rate does not depend on time.
pub fn is_time_invariant(spec: &ModelSpec, kind: RateKind) -> bool {
    kind.components(spec).iter().all(|f| f.is_constant())
}

/// `(1/T) ∫_0^T rate(s) ds` by composite Simpson on `n` panels (rounded up to even).
///
/// The interval is split at the breakpoints of piecewise coefficients so that
/// each Simpson segment integrates a smooth function. Time-invariant rates are
/// returned exactly. This is the finite-horizon proxy for `limsup (1/t)∫rate`.
pub fn time_average(spec: &ModelSpec, kind: RateKind, horizon: f64, n: usize) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(ModelError::InvalidConfig(format!(
            "averaging horizon must be > 0, got {horizon}"
        )));
    }
    if n < 16 {
        return Err(ModelError::InvalidConfig(format!(
            "need at least 16 Simpson panels, got {n}"
        )));
    }
    if is_time_invariant(spec, kind) {
        return derived_rate(spec, kind, 0.0);
    }
    let mut cuts: Vec<f64> = kind
        .components(spec)
        .iter()
        .flat_map(|f| f.breakpoints())
        .filter(|b| *b > 0.0 && *b < horizon)
        .collect();
    cuts.push(0.0);
    cuts.push(horizon);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let panels = ((n as f64 * (hi - lo) / horizon).ceil() as usize).max(2);
        let panels = panels + panels % 2;
        // Left-limit at the right end: piecewise values are right-continuous.
        let right = if hi < horizon { prev_float(hi) } else { hi };
        total += simpson(lo, right, panels, |t| derived_rate(spec, kind, t))?;
    }
    Ok(total / horizon)
}

fn prev_float(x: f64) -> f64 {
    if x > 0.0 {
        f64::from_bits(x.to_bits() - 1)
    } else {
        x
    }
}

fn simpson<F: Fn(f64) -> Result<f64>>(lo: f64, hi: f64, panels: usize, f: F) -> Result<f64> {
    let h = (hi - lo) / panels as f64;
    let mut acc = f(lo)? + f(hi)?;
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + k as f64 * h)?;
    }
    Ok(acc * h / 3.0)
}

/// Infimum and supremum of a rate over `t >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateExtremes {
    pub inf: f64,
    pub sup: f64,
    /// Set when the bounds come from interval arithmetic over sinusoidal
    /// components and may be wider than the true range.
    pub conservative: bool,
}

/// Exact extremes for constant/piecewise coefficient families, interval
/// arithmetic (flagged conservative) when a sinusoid is involved.
pub fn extremes(spec: &ModelSpec, kind: RateKind) -> Result<RateExtremes> {
    let comps = kind.components(spec);
    if !comps.iter().any(|f| f.is_sinusoidal()) {
        // Piecewise-constant in t: the rate is constant between the union of breakpoints.
        let mut points: Vec<f64> = comps.iter().flat_map(|f| f.breakpoints()).collect();
        points.push(0.0);
        points.sort_by(f64::total_cmp);
        points.dedup();
        let mut inf = f64::INFINITY;
        let mut sup = f64::NEG_INFINITY;
        for t in points {
            let v = derived_rate(spec, kind, t)?;
            inf = inf.min(v);
            sup = sup.max(v);
        }
        return Ok(RateExtremes {
            inf,
            sup,
            conservative: false,
        });
    }

    let sp = kind.species();
    let s = spec.species(sp);
    let a = s.a.extremes();
    let (inf, sup) = match kind {
        RateKind::Alpha(_) => {
            let mass = s.delta.shape_mass(&spec.pi2);
            add(a, scale_interval(s.delta.scale.extremes(), mass))
        }
        RateKind::Beta(_) => beta_interval(spec, sp)?,
        RateKind::P(Species::Prey) | RateKind::Q(Species::Prey) => sub(a, beta_interval(spec, sp)?),
        RateKind::P(Species::Predator) => sub(neg(a), beta_interval(spec, sp)?),
        RateKind::Q(Species::Predator) => {
            let ratio = div(s.c.extremes(), spec.m.extremes());
            sub(add(neg(a), ratio), beta_interval(spec, sp)?)
        }
    };
    Ok(RateExtremes {
        inf,
        sup,
        conservative: true,
    })
}

type Interval = (f64, f64);

fn add(x: Interval, y: Interval) -> Interval {
    (x.0 + y.0, x.1 + y.1)
}

fn neg(x: Interval) -> Interval {
    (-x.1, -x.0)
}

fn sub(x: Interval, y: Interval) -> Interval {
    add(x, neg(y))
}

fn scale_interval(x: Interval, k: f64) -> Interval {
    let (a, b) = (x.0 * k, x.1 * k);
    (a.min(b), a.max(b))
}

fn div(x: Interval, y: Interval) -> Interval {
    if y.0 <= 0.0 && y.1 >= 0.0 {
        return (f64::NEG_INFINITY, f64::INFINITY);
    }
    let c = [x.0 / y.0, x.0 / y.1, x.1 / y.0, x.1 / y.1];
    c.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(*v), hi.max(*v))
        })
}

fn square(x: Interval) -> Interval {
    let (a, b) = (x.0 * x.0, x.1 * x.1);
    if x.0 <= 0.0 && x.1 >= 0.0 {
        (0.0, a.max(b))
    } else {
        (a.min(b), a.max(b))
    }
}

fn beta_interval(spec: &ModelSpec, sp: Species) -> Result<Interval> {
    let s = spec.species(sp);
    let diffusion = scale_interval(square(s.sigma.extremes()), 0.5);
    let small = convex_range(&s.gamma, &spec.pi1, Transform::XMinusLog1p, 1.0)?;
    let large = convex_range(&s.delta, &spec.pi2, Transform::Log1p, -1.0)?;
    Ok(add(add(diffusion, small), large))
}

/// Range of `sign * ∫ transform(s * shape(z)) Π(dz)` as the scale `s` sweeps its extremes.
/// Both integrands used here are convex in `s` (with the sign applied), so the
/// maximum sits at an endpoint and the minimum is found by golden-section search.
fn convex_range(
    kernel: &JumpKernel,
    measure: &LevyMeasureSpec,
    transform: Transform,
    sign: f64,
) -> Result<Interval> {
    if measure.intensity == 0.0 || kernel.is_zero() {
        return Ok((0.0, 0.0));
    }
    let (amp_lo, _) = kernel.amplitude_bounds(&measure.marks);
    if amp_lo <= -1.0 {
        return Err(ModelError::KernelDomain {
            t: f64::NAN,
            z: f64::NAN,
            amplitude: amp_lo,
        });
    }
    let g = |scale: f64| sign * measure.integrate(|z| transform.apply(scale * kernel.shape.at(z)));
    let (mut lo, mut hi) = kernel.scale.extremes();
    let (g_lo, g_hi) = (g(lo), g(hi));
    let sup = g_lo.max(g_hi);
    let mut inf = g_lo.min(g_hi);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        if hi - lo <= 1e-15 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        let x1 = hi - phi * (hi - lo);
        let x2 = lo + phi * (hi - lo);
        if g(x1) < g(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    inf = inf.min(g(0.5 * (lo + hi)));
    Ok((inf, sup))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{JumpKernel, LevyMeasureSpec, SpeciesParams};

    fn rate_example_spec() -> ModelSpec {
        // σ = 0.2, γ ≡ 0.1 with λ1 = 2, δ ≡ −0.05 with λ2 = 1 on both species.
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

    #[test]
    fn beta_alpha_q_examples() {
        let spec = rate_example_spec();
        let b = derived_rate(&spec, RateKind::Beta(Species::Predator), 0.0).unwrap();
        let expected = 0.02 + 2.0 * (0.1 - 1.1f64.ln()) - 0.95f64.ln();
        assert!((b - expected).abs() < 1e-15);
        assert!((b - 0.0806729).abs() < 5e-8);
        let a2 = derived_rate(&spec, RateKind::Alpha(Species::Predator), 0.0).unwrap();
        assert!((a2 - 0.35).abs() < 1e-15);
        let q2 = derived_rate(&spec, RateKind::Q(Species::Predator), 0.0).unwrap();
        assert!((q2 - (-0.4 + 0.5 - expected)).abs() < 1e-15);
        assert!((q2 - 0.0193271).abs() < 5e-8);
    }

    #[test]
    fn constant_rate_average_is_exact() {
        let spec = rate_example_spec();
        let q2 = derived_rate(&spec, RateKind::Q(Species::Predator), 0.0).unwrap();
        for (horizon, n) in [(100.0, 16), (1.0, 17), (3.7, 1000)] {
            let avg = time_average(&spec, RateKind::Q(Species::Predator), horizon, n).unwrap();
            assert_eq!(avg, q2);
        }
    }

    fn sine_spec() -> ModelSpec {
        // q_1(t) = a_1(t) − β_1 = (0.1 + 0.2 sin 2πt) − 0.2 with σ_1² = 0.4
        let mut spec = rate_example_spec();
        spec.prey = SpeciesParams::constant(0.0, 0.5, 0.5).with_sigma(0.4f64.sqrt());
        spec.prey.a = TimeFunction::sinusoidal(0.1, 0.2, 2.0 * std::f64::consts::PI, 0.0);
        spec
    }

    #[test]
    fn sine_average_over_full_period() {
        let avg = time_average(&sine_spec(), RateKind::Q(Species::Prey), 1.0, 64).unwrap();
        assert!((avg + 0.1).abs() < 1e-12, "{avg}");
    }

    #[test]
    fn sine_average_over_quarter_period() {
        // Oracle: −0.1 + (1/0.25)·(0.2/2π)(1 − cos(π/2)) = −0.1 + 0.4/π
        let oracle = -0.1 + 0.4 / std::f64::consts::PI;
        assert!((oracle - 0.0273240).abs() < 5e-8);
        let avg = time_average(&sine_spec(), RateKind::Q(Species::Prey), 0.25, 64).unwrap();
        assert!((avg - oracle).abs() < 1e-9, "{avg} vs {oracle}");
    }

    #[test]
    fn piecewise_average_is_exact() {
        let mut spec = rate_example_spec();
        spec.prey.a = TimeFunction::piecewise(vec![(0.0, 1.0), (0.3, 2.0)]);
        let b1 = derived_rate(&spec, RateKind::Beta(Species::Prey), 0.0).unwrap();
        let avg = time_average(&spec, RateKind::P(Species::Prey), 1.0, 16).unwrap();
        assert!((avg - (0.3 + 1.4 - b1)).abs() < 1e-12);
    }

    #[test]
    fn time_average_rejects_bad_arguments() {
        let spec = rate_example_spec();
        assert!(time_average(&spec, RateKind::P(Species::Prey), 0.0, 100).is_err());
        assert!(time_average(&spec, RateKind::P(Species::Prey), 1.0, 8).is_err());
    }

    #[test]
    fn extremes_constant_and_sinusoidal() {
        let spec = rate_example_spec();
        let e = extremes(&spec, RateKind::P(Species::Predator)).unwrap();
        let v = derived_rate(&spec, RateKind::P(Species::Predator), 0.0).unwrap();
        assert_eq!((e.inf, e.sup, e.conservative), (v, v, false));

        let mut spec = rate_example_spec();
        spec.predator.a = TimeFunction::sinusoidal(0.4, 0.1, 1.0, 0.0);
        let e = extremes(&spec, RateKind::P(Species::Predator)).unwrap();
        assert!(e.conservative);
        assert!((e.inf + 0.5806729).abs() < 5e-8, "{}", e.inf);
        assert!((e.sup + 0.3806729).abs() < 5e-8, "{}", e.sup);
    }

    #[test]
    fn large_positive_jumps_make_p2_positive() {
        let mut spec = rate_example_spec();
        spec.predator =
            SpeciesParams::constant(0.1, 0.5, 1.0).with_delta(JumpKernel::constant(0.5));
        spec.pi2 = LevyMeasureSpec::atom(2.0, 0.0);
        let b = derived_rate(&spec, RateKind::Beta(Species::Predator), 0.0).unwrap();
        assert!((b + 0.8109302).abs() < 5e-8);
        let e = extremes(&spec, RateKind::P(Species::Predator)).unwrap();
        assert!((e.inf - 0.7109302).abs() < 5e-8);
    }

    #[test]
    fn piecewise_extremes_are_exact() {
        let mut spec = rate_example_spec();
        spec.prey.a = TimeFunction::piecewise(vec![(0.0, 1.0), (2.0, 0.5)]);
        spec.prey.sigma = TimeFunction::piecewise(vec![(0.0, 0.2), (1.0, 0.6)]);
        // Intervals: [0,1): a=1, σ=.2 ; [1,2): a=1, σ=.6 ; [2,∞): a=.5, σ=.6
        let jumps = 2.0 * (0.1 - 1.1f64.ln()) - 0.95f64.ln();
        let e = extremes(&spec, RateKind::P(Species::Prey)).unwrap();
        assert!(!e.conservative);
        assert!((e.sup - (1.0 - 0.02 - jumps)).abs() < 1e-15);
        assert!((e.inf - (0.5 - 0.18 - jumps)).abs() < 1e-15);
    }

    #[test]
    fn sinusoidal_jump_scale_bounds_contain_samples() {
        let mut spec = rate_example_spec();
        spec.prey.gamma = JumpKernel::new(
            TimeFunction::sinusoidal(0.0, 0.4, 1.3, 0.2),
            crate::model::Shape::Identity,
        );
        spec.pi1 = LevyMeasureSpec::new(
            1.5,
            crate::model::MarkDistribution::Uniform { lo: -1.0, hi: 1.0 },
        );
        let e = extremes(&spec, RateKind::Beta(Species::Prey)).unwrap();
        for k in 0..500 {
            let t = k as f64 * 0.037;
            let v = derived_rate(&spec, RateKind::Beta(Species::Prey), t).unwrap();
            assert!(v >= e.inf - 1e-12 && v <= e.sup + 1e-12);
        }
    }
}
