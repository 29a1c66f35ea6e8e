use predprey::fixtures;
use predprey::integrator::Dynamics;
use predprey::model::*;
use predprey::rng::{Purpose, RngSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spec_from(seed: u64) -> ModelSpec {
    fixtures::random_valid(&mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn compensator_identity(seed in any::<u64>(), t in 0.0f64..50.0, x1 in -8.0f64..5.0, x2 in -8.0f64..5.0) {
        let spec = spec_from(seed);
        let dynamics = Dynamics::new(&spec).unwrap();
        let g = dynamics.event_drift(t, [x1, x2]).unwrap();
        let d = drift_log(&spec, t, [x1, x2]).unwrap();
        for sp in Species::BOTH {
            let s = spec.species(sp);
            let i = sp.index();
            let j1 = jump_integral(&s.gamma, &spec.pi1, t, Transform::Log1p).unwrap();
            let j2 = jump_integral(&s.delta, &spec.pi2, t, Transform::Log1p).unwrap();
            prop_assert!((g[i] + j1 + j2 - d[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rate_relations(seed in any::<u64>(), t in 0.0f64..50.0) {
        let spec = spec_from(seed);
        for sp in Species::BOTH {
            let s = spec.species(sp);
            let sig = s.sigma.eval(t).unwrap();
            let b = beta(&spec, sp, t).unwrap();
            let delta_nonpositive = s.delta.amplitude_bounds(&spec.pi2.marks).1 <= 0.0;
            if delta_nonpositive || spec.pi2.intensity == 0.0 {
                prop_assert!(b >= 0.5 * sig * sig - 1e-12);
            }
        }
        let p1 = derived_rate(&spec, RateKind::P(Species::Prey), t).unwrap();
        let q1 = derived_rate(&spec, RateKind::Q(Species::Prey), t).unwrap();
        prop_assert_eq!(p1, q1);
        let p2 = derived_rate(&spec, RateKind::P(Species::Predator), t).unwrap();
        let q2 = derived_rate(&spec, RateKind::Q(Species::Predator), t).unwrap();
        let gap = spec.predator.c.eval(t).unwrap() / spec.m.eval(t).unwrap();
        prop_assert!((q2 - p2 - gap).abs() < 1e-12 * (1.0 + gap));
    }

    #[test]
    fn no_jumps_means_beta_is_half_sigma_squared(seed in any::<u64>(), t in 0.0f64..50.0) {
        let mut spec = spec_from(seed);
        for sp in Species::BOTH {
            spec.species_mut(sp).gamma = JumpKernel::zero();
            spec.species_mut(sp).delta = JumpKernel::zero();
        }
        for sp in Species::BOTH {
            let sig = spec.species(sp).sigma.eval(t).unwrap();
            prop_assert_eq!(beta(&spec, sp, t).unwrap(), 0.5 * sig * sig);
            prop_assert_eq!(
                derived_rate(&spec, RateKind::Alpha(sp), t).unwrap(),
                spec.species(sp).a.eval(t).unwrap()
            );
        }
    }

    #[test]
    fn constant_rate_average_is_exact(seed in any::<u64>(), horizon in 0.01f64..500.0, n in 16usize..4000) {
        let spec = fixtures::random_constant(&mut ChaCha8Rng::seed_from_u64(seed));
        for kind in [RateKind::P(Species::Prey), RateKind::Q(Species::Predator), RateKind::Beta(Species::Prey)] {
            let c = derived_rate(&spec, kind, 0.0).unwrap();
            prop_assert_eq!(time_average(&spec, kind, horizon, n).unwrap(), c);
        }
    }

    #[test]
    fn power_one_equals_identity(seed in any::<u64>(), t in 0.0f64..20.0) {
        let spec = spec_from(seed);
        for sp in Species::BOTH {
            let k = &spec.species(sp).gamma;
            prop_assert_eq!(
                jump_integral(k, &spec.pi1, t, Transform::Power(1.0)).unwrap(),
                jump_integral(k, &spec.pi1, t, Transform::Identity).unwrap()
            );
        }
    }

    #[test]
    fn extremes_bracket_samples(seed in any::<u64>()) {
        let spec = spec_from(seed);
        for kind in [RateKind::P(Species::Prey), RateKind::P(Species::Predator), RateKind::Q(Species::Predator)] {
            let e = extremes(&spec, kind).unwrap();
            for k in 0..200 {
                let v = derived_rate(&spec, kind, 0.173 * k as f64).unwrap();
                prop_assert!(e.inf - 1e-9 <= v && v <= e.sup + 1e-9, "{} not in [{}, {}]", v, e.inf, e.sup);
            }
        }
    }
}

#[test]
fn uniform_mark_quadrature_matches_monte_carlo() {
    let kernel = JumpKernel::new(
        TimeFunction::constant(0.4),
        Shape::Affine {
            intercept: 0.1,
            slope: 0.5,
        },
    );
    let measure = LevyMeasureSpec::new(2.0, MarkDistribution::Uniform { lo: -1.0, hi: 1.5 });
    let mut rng = RngSpec::new(8, 0).stream(Purpose::Measure1Marks);
    for transform in [
        Transform::Identity,
        Transform::Log1p,
        Transform::XMinusLog1p,
        Transform::Power(2.5),
        Transform::PowerMinusOne(0.5),
    ] {
        let n = 1_000_000;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..n {
            let z: f64 = rng.random_range(-1.0..1.5);
            let v = 2.0 * transform.apply(kernel.amplitude(0.0, z));
            sum += v;
            sq += v * v;
        }
        let mean = sum / n as f64;
        let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
        let exact = jump_integral(&kernel, &measure, 0.0, transform).unwrap();
        assert!(
            (exact - mean).abs() < 3.0 * se,
            "{transform:?}: {exact} vs {mean} ± {se}"
        );
    }
}
