use std::f64::consts::FRAC_PI_2;

use bjj_core::evolution::{
    convergence_check, evolve, evolve_backward, propagate_raw, MIN_REFERENCE_DT,
};
use bjj_core::protocol::split_trajectory;
use bjj_core::spectral::ground_state;
use bjj_core::spin::{coherent_state, fidelity};
use bjj_core::{Error, ProtocolConfig, Schedule, SpinBasis, StateVector, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn splitter() -> (StateVector, Schedule) {
    let config = ProtocolConfig::reference();
    let initial = ground_state(&config.strong_coupling_params().unwrap()).unwrap();
    (initial, config.split_schedule().unwrap())
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<C64> {
    (0..dim)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

#[test]
fn splitter_convergence_order() {
    let (initial, schedule) = splitter();
    // the small excited admixture carries phases ~ gap³·dt²·t, which only
    // become perturbative below a few 1e-4 on this ramp
    let c = convergence_check(&initial, &schedule, 2.5e-4).unwrap();
    assert!(
        (1.7..=2.3).contains(&c.observed_order),
        "order {} ({:e}, {:e})",
        c.observed_order,
        c.error_dt,
        c.error_dt_half
    );
}

#[test]
fn reference_resolution_is_rejected() {
    let (initial, schedule) = splitter();
    let too_fine = 4.0 * MIN_REFERENCE_DT;
    assert_eq!(
        convergence_check(&initial, &schedule, too_fine),
        Err(Error::ReferenceResolution(too_fine))
    );
}

/// Exact propagator for `H = −T·Jx + (E_C/2)·Jz²` at N = 2, δ = 0: the
/// antisymmetric combination of `M = ±1` decouples at energy `E_C/2`, the
/// rest is the 2×2 block `[[E_C/2, −T], [−T, 0]]` on `{(|−1⟩+|+1⟩)/√2, |0⟩}`.
fn exact_three_level(coupling: f64, charging: f64, psi: &[C64], t: f64) -> Vec<C64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (a, b, c) = (charging / 2.0, -coupling, 0.0);
    let mean = (a + c) / 2.0;
    let half = (((a - c) / 2.0).powi(2) + b * b).sqrt();
    let (l1, l2) = (mean - half, mean + half);
    // eigenvector of the block for l1, then its orthogonal partner
    let (x, y) = (b, l1 - a);
    let norm = (x * x + y * y).sqrt();
    let u1 = [x / norm, y / norm];
    let u2 = [-u1[1], u1[0]];

    let sym = (psi[0] + psi[2]) * r;
    let anti = (psi[0] - psi[2]) * r;
    let mid = psi[1];
    let phase = |l: f64| C64::from_polar(1.0, -l * t);
    let p1 = (sym * u1[0] + mid * u1[1]) * phase(l1);
    let p2 = (sym * u2[0] + mid * u2[1]) * phase(l2);
    let sym_t = p1 * u1[0] + p2 * u2[0];
    let mid_t = p1 * u1[1] + p2 * u2[1];
    let anti_t = anti * phase(a);
    vec![(sym_t + anti_t) * r, mid_t, (sym_t - anti_t) * r]
}

#[test]
fn constant_hamiltonian_matches_closed_form_at_second_order() {
    let basis = SpinBasis::new(2).unwrap();
    let (coupling, charging, duration) = (1.3, -2.0, 5.0);
    let schedule = Schedule::linear_ramp(
        basis,
        charging,
        0.0,
        duration,
        (0.0, coupling),
        (0.0, coupling),
    )
    .unwrap();
    let psi0 = StateVector::normalized(
        basis,
        vec![C64::new(0.3, 0.1), C64::new(-0.5, 0.7), C64::new(0.2, -0.4)],
    )
    .unwrap();
    let exact = exact_three_level(coupling, charging, psi0.amplitudes(), duration);

    let errors: Vec<f64> = [0.05, 0.025, 0.0125]
        .iter()
        .map(|&dt| {
            let psi = propagate_raw(psi0.amplitudes(), &schedule, dt).unwrap();
            psi.iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!(
            (3.6..=4.4).contains(&ratio),
            "ratio {ratio}, errors {errors:?}"
        );
    }
}

#[test]
fn coherent_state_is_stationary_under_tunnelling() {
    let basis = SpinBasis::new(20).unwrap();
    let initial = coherent_state(basis, FRAC_PI_2, 0.0);
    let schedule = Schedule::linear_ramp(basis, 0.0, 0.0, 10.0, (0.0, 3.0), (0.0, 3.0)).unwrap();
    let trajectory = evolve(&initial, &schedule, 0.01, 50).unwrap();
    assert!(trajectory.samples.len() > 10);
    let f = fidelity(&initial, &trajectory.final_state).unwrap();
    assert!(f > 1.0 - 1e-10, "fidelity {f}");
}

#[test]
fn norm_is_preserved_at_any_step() {
    let (initial, schedule) = splitter();
    for dt in [0.001, 0.01, 0.1, 1.0, 10.0] {
        let trajectory = evolve(&initial, &schedule, dt, 1).unwrap();
        assert!(trajectory.max_norm_drift() <= 1e-9, "dt {dt}");
        for s in &trajectory.samples {
            assert!(s.f0 >= 0.0 && s.f1 >= 0.0 && s.f0 + s.f1 <= 1.0 + 1e-9);
        }
    }
}

#[test]
fn time_reversal_recovers_initial_state() {
    let (initial, schedule) = splitter();
    let dt = 1e-3;
    let forward = evolve(&initial, &schedule, dt, 0).unwrap().final_state;

    let back = evolve_backward(&forward, &schedule, dt).unwrap();
    assert!(fidelity(&initial, &back).unwrap() >= 1.0 - 1e-6);

    // U† = K·U_rev·K for a real Hamiltonian and midpoint steps
    let conj = |s: &StateVector| {
        StateVector::from_amplitudes_unchecked(
            *s.basis(),
            s.amplitudes().iter().map(|c| c.conj()).collect(),
        )
        .unwrap()
    };
    let reversed = evolve(&conj(&forward), &schedule.reversed(), dt, 0)
        .unwrap()
        .final_state;
    let recovered = conj(&reversed);
    assert!(fidelity(&initial, &recovered).unwrap() >= 1.0 - 1e-6);
}

#[test]
fn propagation_is_linear() {
    let (_, schedule) = splitter();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let dim = schedule.basis().dim();
    let x = random_vector(&mut rng, dim);
    let y = random_vector(&mut rng, dim);
    let (alpha, beta) = (C64::new(0.7, -1.2), C64::new(-0.4, 2.5));
    let combo: Vec<C64> = x
        .iter()
        .zip(&y)
        .map(|(a, b)| alpha * a + beta * b)
        .collect();
    let dt = 0.01;
    let ux = propagate_raw(&x, &schedule, dt).unwrap();
    let uy = propagate_raw(&y, &schedule, dt).unwrap();
    let ucombo = propagate_raw(&combo, &schedule, dt).unwrap();
    for i in 0..dim {
        assert!((ucombo[i] - (alpha * ux[i] + beta * uy[i])).norm() <= 1e-8);
    }
}

#[test]
fn invalid_runs_are_rejected() {
    let (initial, schedule) = splitter();
    assert_eq!(
        evolve(&initial, &schedule, 0.0, 0).unwrap_err(),
        Error::InvalidStep(0.0)
    );
    assert_eq!(
        evolve(&initial, &schedule, -1.0, 0).unwrap_err(),
        Error::InvalidStep(-1.0)
    );
    assert!(matches!(
        evolve(&initial, &schedule, 41.0, 0),
        Err(Error::StepTooLong { .. })
    ));

    let doubled: Vec<C64> = initial.amplitudes().iter().map(|c| c * 2.0).collect();
    let unnormalized = StateVector::from_amplitudes_unchecked(*initial.basis(), doubled).unwrap();
    assert!(matches!(
        evolve(&unnormalized, &schedule, 0.01, 0),
        Err(Error::NotNormalized { .. })
    ));

    let other = coherent_state(SpinBasis::new(4).unwrap(), FRAC_PI_2, 0.0);
    assert!(matches!(
        evolve(&other, &schedule, 0.01, 0),
        Err(Error::BasisMismatch { .. })
    ));
}

#[test]
fn splitter_trajectory_diagnostics() {
    let trajectory = split_trajectory(&ProtocolConfig::reference()).unwrap();
    assert_eq!(trajectory.samples.first().unwrap().coupling, 40.0);
    assert_eq!(trajectory.samples.last().unwrap().coupling, 0.0);
    assert!((trajectory.samples[0].f0 - 1.0).abs() < 1e-12);
    assert!(trajectory.min_subspace_population() >= 0.99);
    assert!(trajectory.max_norm_drift() <= 1e-9);
    // 40 000 steps sampled every 100, plus the initial sample
    assert_eq!(trajectory.samples.len(), 401);
}
