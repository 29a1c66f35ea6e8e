use predprey::analysis::{run_ensemble, EstimatorConfig};
use predprey::fixtures::{self, ORACLE_EQUILIBRIUM};
use predprey::integrator::{apply_jump, step_continuous};
use predprey::model::{JumpKernel, LevyMeasureSpec, SpeciesParams};
use predprey::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn pure_jump_path_matches_closed_form() {
    let spec = fixtures::pure_jump();
    for seed in 0..20 {
        let cfg = SolverConfig::new(1e-3, 5.0, RngSpec::new(seed, 0));
        let path = integrate_path(&spec, &cfg).unwrap();
        for (t, x) in path.times.iter().zip(&path.states) {
            let n = path.events.events.iter().filter(|e| e.time <= *t).count() as f64;
            let exact = (n * 1.1f64.ln() - 0.2 * t).exp();
            assert!(
                (x[0] - exact).abs() <= 1e-12 * exact.max(1.0),
                "t = {t}: {} vs {exact}",
                x[0]
            );
            assert_eq!(x[1], 1.0);
        }
        // every event time is a grid point exactly once
        for e in &path.events.events {
            assert_eq!(path.times.iter().filter(|t| **t == e.time).count(), 1);
        }
    }
}

#[test]
fn pure_jump_is_refinement_invariant() {
    let spec = fixtures::pure_jump();
    for seed in 0..10 {
        let coarse =
            integrate_path(&spec, &SolverConfig::new(1e-1, 3.0, RngSpec::new(seed, 0))).unwrap();
        let fine =
            integrate_path(&spec, &SolverConfig::new(1e-3, 3.0, RngSpec::new(seed, 0))).unwrap();
        let (a, b) = (coarse.last()[0], fine.last()[0]);
        assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
    }
}

#[test]
fn pure_jump_mean_is_conserved() {
    let spec = fixtures::pure_jump();
    let cfg = SolverConfig::new(1e-2, 1.0, RngSpec::new(77, 0));
    let stats = run_ensemble(&spec, &cfg, 20_000, &EstimatorConfig::default()).unwrap();
    let end = stats.checkpoints.last().unwrap();
    let se = (end.prey.var / 20_000.0).sqrt();
    assert!(
        (end.prey.mean - 1.0).abs() < 3.0 * se,
        "{} ± {se}",
        end.prey.mean
    );
}

#[test]
fn oracle_equilibrium_is_fixed() {
    let mut spec = fixtures::oracle();
    spec.x0 = ORACLE_EQUILIBRIUM;
    let path = integrate_path(&spec, &SolverConfig::new(1e-3, 100.0, RngSpec::new(1, 0))).unwrap();
    for x in &path.states {
        assert!(
            (x[0] - ORACLE_EQUILIBRIUM[0]).abs() < 1e-6
                && (x[1] - ORACLE_EQUILIBRIUM[1]).abs() < 1e-6
        );
    }
}

#[test]
fn rk4_and_log_scheme_agree_without_noise() {
    let spec = fixtures::oracle();
    let cfg = SolverConfig::new(1e-3, 50.0, RngSpec::new(1, 0));
    let a = integrate_path(&spec, &cfg).unwrap().last();
    let b = integrate_deterministic(&spec, &cfg).unwrap().last();
    for i in 0..2 {
        assert!((a[i] - b[i]).abs() / b[i] < 1e-3);
    }
    let long = SolverConfig::new(1e-3, 200.0, RngSpec::new(1, 0));
    for x in [
        integrate_path(&spec, &long).unwrap().last(),
        integrate_deterministic(&spec, &long).unwrap().last(),
    ] {
        assert!(
            (x[0] - ORACLE_EQUILIBRIUM[0]).abs() < 1e-6
                && (x[1] - ORACLE_EQUILIBRIUM[1]).abs() < 1e-6,
            "{x:?}"
        );
    }
}

#[test]
fn zero_noise_gap_shrinks_linearly() {
    let spec = fixtures::oracle();
    let gap = |dt: f64| {
        let cfg = SolverConfig::new(dt, 10.0, RngSpec::new(1, 0));
        let a = integrate_path(&spec, &cfg).unwrap().last();
        let b = integrate_deterministic(&spec, &cfg).unwrap().last();
        (a[0] - b[0]).hypot(a[1] - b[1])
    };
    let (g1, g2) = (gap(1e-2), gap(5e-3));
    assert!(g1 / 1e-2 < 1.0, "C = {}", g1 / 1e-2);
    assert!((g1 / g2 - 2.0).abs() < 0.2, "ratio {}", g1 / g2);
}

#[test]
fn logistic_rk4_reaches_capacity() {
    let mut spec = fixtures::logistic_prey(0.0);
    spec.predator = SpeciesParams::constant(0.0, 0.0, 0.0);
    let x = integrate_deterministic(&spec, &SolverConfig::new(1e-2, 50.0, RngSpec::new(0, 0)))
        .unwrap()
        .last();
    assert!((x[0] - 2.0).abs() < 1e-8);
    assert!(integrate_deterministic(
        &fixtures::diffusive(),
        &SolverConfig::new(1e-2, 1.0, RngSpec::new(0, 0))
    )
    .is_err());
}

#[test]
fn jump_actions() {
    let mut spec = fixtures::permanence();
    spec.predator.delta = JumpKernel::constant(-0.5);
    let e = JumpEvent {
        time: 1.0,
        measure: 2,
        mark: 0.0,
    };
    let xi = apply_jump(&spec, 1.0, [0.0, 2f64.ln()], &e).unwrap();
    assert!((xi[1].exp() - 1.0).abs() < 1e-15);
    assert_eq!(xi[0], 0.0);
    spec.predator.delta = JumpKernel::constant(0.3);
    assert!(apply_jump(&spec, 1.0, [0.0, 0.0], &e).unwrap()[1] > 0.0);
    let p = fixtures::pure_jump();
    let e1 = JumpEvent {
        time: 0.5,
        measure: 1,
        mark: 0.0,
    };
    let xi = apply_jump(&p, 0.5, [0.0, 0.0], &e1).unwrap();
    assert_eq!(xi[0].exp(), 1.1);
    assert!(step_continuous(&p, 0.0, [0.0, 0.0], 0.0, [0.0, 0.0]).is_err());
}

#[test]
fn convergence_orders() {
    let dts = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
    let det = convergence_study(&fixtures::oracle(), &dts, 1, 1.0, 3).unwrap();
    let o = det.strong_order.unwrap();
    assert!((o - 1.0).abs() < 0.2, "deterministic order {o}");

    let jumps = convergence_study(&fixtures::pure_jump(), &dts, 200, 1.0, 3).unwrap();
    assert!(
        jumps.strong_errors.iter().all(|e| *e < 1e-13),
        "{:?}",
        jumps.strong_errors
    );

    // σ is constant, so the noise is additive for ξ = ln x and Euler–Maruyama
    // coincides with Milstein: strong order one, not one half.
    let diff = convergence_study(&fixtures::diffusive(), &dts, 2000, 1.0, 3).unwrap();
    let s = diff.strong_order.unwrap();
    let w = diff.weak_order.unwrap();
    assert!((s - 1.0).abs() < 0.15, "strong {s}");
    assert!((w - 1.0).abs() < 0.3, "weak {w}");
}

#[test]
fn record_stride_and_csv() {
    let spec = fixtures::baseline();
    let cfg = SolverConfig::new(1e-2, 1.0, RngSpec::new(42, 0)).with_stride(10);
    let path = integrate_path(&spec, &cfg).unwrap();
    assert_eq!(path.times.len(), 11 + path.events.len());
    let mut buf = Vec::new();
    path.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,x1,x2\n0,1,1\n"));
    let empty = integrate_path(&spec, &SolverConfig::new(1e-2, 0.0, RngSpec::new(42, 0))).unwrap();
    assert_eq!(empty.times, vec![0.0]);
}

#[test]
fn explicit_decoupled_predator_keeps_positivity() {
    let mut spec = fixtures::baseline();
    spec.kappa = None;
    spec.predator.c = 3.0.into();
    spec.pi2 = LevyMeasureSpec::atom(5.0, 0.0);
    let path = integrate_path(&spec, &SolverConfig::new(1e-3, 10.0, RngSpec::new(9, 0))).unwrap();
    assert!(path.states.iter().all(|x| x[0] > 0.0 && x[1] > 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn recorded_states_are_positive(seed in any::<u64>()) {
        let spec = fixtures::random_valid(&mut ChaCha8Rng::seed_from_u64(seed));
        let path = integrate_path(&spec, &SolverConfig::new(1e-2, 5.0, RngSpec::new(seed, 0))).unwrap();
        if !path.is_diverged() {
            for x in &path.states {
                prop_assert!(x[0] > 0.0 && x[1] > 0.0 && x[0].is_finite() && x[1].is_finite());
            }
        }
        prop_assert!(path.times.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn same_seed_same_path(seed in any::<u64>()) {
        let spec = fixtures::random_valid(&mut ChaCha8Rng::seed_from_u64(seed));
        let cfg = SolverConfig::new(1e-2, 2.0, RngSpec::new(seed, 5));
        prop_assert_eq!(integrate_path(&spec, &cfg).unwrap(), integrate_path(&spec, &cfg).unwrap());
    }
}
