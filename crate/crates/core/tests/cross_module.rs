use sgdelta::dynamics::{evolve, step};
use sgdelta::experiments::{instability_trial, TrialConfig};
use sgdelta::spectrum::{assemble_linearized, eigen_bottom};
use sgdelta::waves::{boosted_kink_state, ground_state, kink_profile, negate, shift_by_2pi};
use sgdelta::{deviation_norm, energy, Error, FieldState, Grid1D, ImpurityParams, WaveKind};

fn grid() -> Grid1D {
    Grid1D::new(20.0, 2001).unwrap()
}

#[test]
fn negation_commutes_with_evolution() {
    let g = grid();
    let s = boosted_kink_state(&g, 0.4, -4.0, 0.0).unwrap();
    let p = ImpurityParams::sharp(-0.7);
    let a = evolve(&s, &p, 5.0, 0.01, 100).unwrap();
    let b = evolve(&negate(&s), &p, 5.0, 0.01, 100).unwrap();
    assert_eq!(negate(a.final_state()).u1, b.final_state().u1);
    assert_eq!(negate(a.final_state()).u2, b.final_state().u2);
}

#[test]
fn two_pi_shift_commutes_with_evolution() {
    let g = grid();
    let s = boosted_kink_state(&g, 0.4, -4.0, 0.0).unwrap();
    let p = ImpurityParams::sharp(1.3);
    let a = evolve(&s, &p, 5.0, 0.01, 500).unwrap();
    let b = evolve(&shift_by_2pi(&s, 1), &p, 5.0, 0.01, 500).unwrap();
    let back = shift_by_2pi(b.final_state(), -1);
    assert!(deviation_norm(&back, a.final_state()).unwrap().total < 1e-9);
    // energy is invariant under both symmetries
    let e = energy(&s, &p).unwrap().total;
    assert!((energy(&shift_by_2pi(&s, 3), &p).unwrap().total - e).abs() < 1e-9);
    assert_eq!(energy(&negate(&s), &p).unwrap().total, e);
}

#[test]
fn mollified_scattering_conserves_energy() {
    let g = grid();
    let s = boosted_kink_state(&g, 0.6, -6.0, 0.0).unwrap();
    let p = ImpurityParams::mollified(-1.0, 0.2);
    let tr = evolve(&s, &p, 15.0, 0.01, 100).unwrap();
    assert!(
        tr.max_relative_drift() < 1e-4,
        "{}",
        tr.max_relative_drift()
    );
    assert!(tr.bound_growth().is_finite());
}

#[test]
fn impurity_free_boost_is_a_traveling_wave() {
    let g = Grid1D::new(20.0, 4001).unwrap();
    let v = 0.3;
    let s = boosted_kink_state(&g, v, -3.0, 0.0).unwrap();
    let tr = evolve(&s, &ImpurityParams::sharp(0.0), 10.0, 0.005, 2000).unwrap();
    let exact = boosted_kink_state(&g, v, -3.0, 10.0).unwrap();
    assert!(deviation_norm(tr.final_state(), &exact).unwrap().total < 1e-3);
}

#[test]
fn single_step_errors_are_typed() {
    let g = grid();
    let s = kink_profile(&g, 0.0).unwrap();
    assert!(matches!(
        step(&s, &ImpurityParams::sharp(1.0), 0.05),
        Err(Error::Cfl { .. })
    ));
    assert!(matches!(
        step(&s, &ImpurityParams::mollified(1.0, 0.01), 0.005),
        Err(Error::UnresolvedMollifier { .. })
    ));
    let other = FieldState::zeros(&Grid1D::new(10.0, 2001).unwrap());
    assert!(matches!(
        deviation_norm(&s, &other),
        Err(Error::GridMismatch(_))
    ));
}

#[test]
fn growth_detected_exactly_when_lambda1_is_negative() {
    let g = grid();
    let cfg = TrialConfig::new(g.clone(), 0.01).unwrap();
    for (wave, q) in [
        (WaveKind::Kink { center: 0.0 }, 2.0),
        (WaveKind::Kink { center: 0.0 }, -2.0),
        (WaveKind::GroundState { q: 3.0 }, 3.0),
        (WaveKind::GroundState { q: -3.0 }, -3.0),
    ] {
        let bg = wave.state(&g, 0.0).unwrap();
        let r = eigen_bottom(&assemble_linearized(&bg, q).unwrap(), 1, 1e-6).unwrap();
        let unstable = r.eigenvalues[0] < -r.tol_zero;
        let trial = instability_trial(wave, q, 1e-4, 40.0, &cfg);
        match trial {
            Ok(t) => assert!(
                unstable && t.relative_mismatch.unwrap() < 0.1,
                "{wave:?} {q}"
            ),
            Err(Error::NoGrowth(_)) => assert!(!unstable, "{wave:?} {q}"),
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn ground_state_energy_sign_follows_the_coupling() {
    let g = Grid1D::new(20.0, 8001).unwrap();
    for q in [-6.0, -3.0, -2.5] {
        let e = energy(&ground_state(&g, q).unwrap(), &ImpurityParams::sharp(q))
            .unwrap()
            .total;
        assert!(e < 0.0, "q = {q}: {e}");
    }
    for q in [2.5, 3.0, 6.0] {
        let e = energy(&ground_state(&g, q).unwrap(), &ImpurityParams::sharp(q))
            .unwrap()
            .total;
        assert!(e > 0.0, "q = {q}: {e}");
    }
}
