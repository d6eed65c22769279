//! NOON-family fidelity, interference fringes, Born-rule sampling and phase
//! estimation.
//!
//! The phase estimator inverts the ideal fringe `f0 = cos²(φ/2)` and
//! propagates the binomial counting error. Because a NOON state accumulates
//! the collective phase `φ = N·θ` for a single-particle phase `θ`, the
//! per-particle uncertainty is `Δθ = Δφ / N`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::protocol::{full_mz, InterferenceResult, ProtocolConfig};
use crate::spin::{jz_distribution, HalfInt, JzDistribution, SpinBasis, StateVector};

/// Best overlap with the NOON family `(|−J⟩ + e^{iφ}|+J⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoonFit {
    pub fidelity: f64,
    /// Maximizing `φ`, wrapped to `(−π, π]`; `0` when undefined.
    pub phase: f64,
    /// False when either extremal amplitude vanishes.
    pub phase_defined: bool,
}

/// Closed-form maximum over φ of `|⟨Φ(φ)|ψ⟩|²`:
/// `(|c₋J| + |c₊J|)² / 2` at `φ* = arg c₊J − arg c₋J`.
pub fn noon_max_fidelity(state: &StateVector) -> NoonFit {
    let amps = state.amplitudes();
    let low = amps[0];
    let high = amps[amps.len() - 1];
    let fidelity = ((low.norm() + high.norm()).powi(2) / 2.0).min(1.0);
    if low.norm() == 0.0 || high.norm() == 0.0 {
        return NoonFit {
            fidelity,
            phase: 0.0,
            phase_defined: false,
        };
    }
    NoonFit {
        fidelity,
        phase: wrap_phase(high.arg() - low.arg()),
        phase_defined: true,
    }
}

/// Wraps into `(−π, π]`.
pub fn wrap_phase(phase: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut p = phase % two_pi;
    if p <= -PI {
        p += two_pi;
    } else if p > PI {
        p -= two_pi;
    }
    p
}

/// `(max − min)/(max + min)`; zero for a flat or all-zero signal.
pub fn visibility(signal: &[f64]) -> f64 {
    let max = signal.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = signal.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max + min > 0.0) {
        return 0.0;
    }
    (max - min) / (max + min)
}

/// Checks that a phase grid has at least three points and covers a period.
pub fn check_fringe_grid(phi_grid: &[f64]) -> Result<()> {
    if phi_grid.len() < 3 {
        return Err(Error::InvalidGrid("a fringe needs at least three phases"));
    }
    if phi_grid.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidGrid("phase grid has non-finite values"));
    }
    let max = phi_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = phi_grid.iter().copied().fold(f64::INFINITY, f64::min);
    // a printed 2π such as 6.2832 still counts as a full period
    if max - min < 2.0 * PI - 1e-4 {
        return Err(Error::InvalidGrid("phase grid must span a full period"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FringeScan {
    pub results: Vec<InterferenceResult>,
    pub visibility: f64,
}

impl FringeScan {
    pub fn from_results(results: Vec<InterferenceResult>) -> Self {
        let f0: Vec<f64> = results.iter().map(|r| r.f0).collect();
        FringeScan {
            visibility: visibility(&f0),
            results,
        }
    }
}

/// Full interferometer run at every phase of the grid.
pub fn fringe_scan(config: &ProtocolConfig, phi_grid: &[f64]) -> Result<FringeScan> {
    check_fringe_grid(phi_grid)?;
    let results = phi_grid
        .iter()
        .map(|&phi| full_mz(config, phi))
        .collect::<Result<Vec<_>>>()?;
    Ok(FringeScan::from_results(results))
}

/// Counts of `Jz` outcomes from repeated projective measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementRecord {
    pub basis: SpinBasis,
    pub shots: u64,
    pub seed: u64,
    /// Every ladder value, including those never observed.
    pub counts: BTreeMap<HalfInt, u64>,
}

impl MeasurementRecord {
    pub fn count(&self, m: HalfInt) -> u64 {
        self.counts.get(&m).copied().unwrap_or(0)
    }

    pub fn count_lowest(&self) -> u64 {
        self.count(self.basis.lowest())
    }

    pub fn count_highest(&self) -> u64 {
        self.count(self.basis.highest())
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .values()
            .map(|&c| c as f64 / self.shots as f64)
            .collect()
    }
}

/// Multinomial draw of `shots` outcomes from a Jz distribution. Identical
/// `(distribution, shots, seed)` give identical counts.
pub fn sample_distribution(
    dist: &JzDistribution,
    shots: u64,
    seed: u64,
) -> Result<MeasurementRecord> {
    if shots < 1 {
        return Err(Error::NoShots);
    }
    let mut cumulative = Vec::with_capacity(dist.probabilities.len());
    let mut acc = 0.0;
    for p in &dist.probabilities {
        acc += p.max(0.0);
        cumulative.push(acc);
    }
    let total = acc;
    let mut tallies = alloc::vec![0u64; cumulative.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * total;
        let index = cumulative
            .partition_point(|&c| c <= u)
            .min(cumulative.len() - 1);
        tallies[index] += 1;
    }
    let basis = dist.basis;
    Ok(MeasurementRecord {
        basis,
        shots,
        seed,
        counts: tallies
            .into_iter()
            .enumerate()
            .map(|(i, c)| (basis.m(i), c))
            .collect(),
    })
}

pub fn sample_measurement(state: &StateVector, shots: u64, seed: u64) -> Result<MeasurementRecord> {
    sample_distribution(&jz_distribution(state), shots, seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseEstimate {
    pub phi_hat: f64,
    /// `Δφ` of the collective phase.
    pub std_error: f64,
    /// `Δθ = Δφ / N`.
    pub per_particle_error: f64,
    pub shots: u64,
    pub n_particles: usize,
    /// Set when all or no shots landed in `f0`: the fringe slope vanishes and
    /// `std_error` is the half-width of the phase interval compatible with
    /// one miscounted shot.
    pub boundary: bool,
}

/// Inverts `f0 = cos²(φ/2)` from `f0_counts` out of `shots`.
pub fn phase_estimate(f0_counts: u64, shots: u64, n_particles: usize) -> Result<PhaseEstimate> {
    if shots < 1 {
        return Err(Error::NoShots);
    }
    if f0_counts > shots {
        return Err(Error::CountsExceedShots {
            counts: f0_counts,
            shots,
        });
    }
    if n_particles == 0 {
        return Err(Error::NoParticles);
    }
    let n_shots = shots as f64;
    let p = f0_counts as f64 / n_shots;
    let phi_hat = 2.0 * p.sqrt().min(1.0).acos();
    let boundary = f0_counts == 0 || f0_counts == shots;
    let std_error = if boundary {
        2.0 * (1.0 / n_shots).sqrt().asin()
    } else {
        let slope = (phi_hat.sin() / 2.0).abs();
        (p * (1.0 - p)).sqrt() / (n_shots.sqrt() * slope)
    };
    Ok(PhaseEstimate {
        phi_hat,
        std_error,
        per_particle_error: std_error / n_particles as f64,
        shots,
        n_particles,
        boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::phase_imprint;
    use crate::spin::{basis_state, coherent_state, noon_state};
    use crate::C64;
    use proptest::prelude::*;

    fn basis(n: usize) -> SpinBasis {
        SpinBasis::new(n).unwrap()
    }

    #[test]
    fn noon_family_fits() {
        let b = basis(20);
        for phi0 in [0.0, 1.0, -2.0, 3.0] {
            let fit = noon_max_fidelity(&noon_state(b, phi0));
            assert!((fit.fidelity - 1.0).abs() < 1e-15);
            assert!(fit.phase_defined && (fit.phase - phi0).abs() < 1e-14);
        }
        let fit = noon_max_fidelity(&basis_state(b, b.lowest()).unwrap());
        assert_eq!(
            (fit.fidelity, fit.phase, fit.phase_defined),
            (0.5, 0.0, false)
        );
        let fit = noon_max_fidelity(&coherent_state(b, PI / 2.0, 0.0));
        assert!((fit.fidelity - 2f64.powi(-19)).abs() < 1e-18);
        assert!((fit.fidelity - 1.907e-6).abs() < 1e-9);
    }

    #[test]
    fn visibilities() {
        let ideal: Vec<f64> = (0..33)
            .map(|k| (k as f64 * PI / 32.0).cos().powi(2))
            .collect();
        assert!((visibility(&ideal) - 1.0).abs() < 1e-15);
        assert_eq!(visibility(&[0.3; 5]), 0.0);
        assert_eq!(visibility(&[0.0; 3]), 0.0);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn fringe_grid_checks() {
        assert!(check_fringe_grid(&[0.0, PI]).is_err());
        assert!(check_fringe_grid(&[0.0, 1.0, 2.0]).is_err());
        assert!(check_fringe_grid(&[0.0, PI, 6.2832]).is_ok());
        assert!(check_fringe_grid(&[]).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_exact_for_eigenstates() {
        let b = basis(20);
        let top = basis_state(b, b.highest()).unwrap();
        let rec = sample_measurement(&top, 777, 3).unwrap();
        assert_eq!(rec.count_highest(), 777);
        assert_eq!(rec.counts.values().sum::<u64>(), 777);
        assert_eq!(rec.counts.len(), 21);

        let noon = noon_state(b, 0.0);
        let a = sample_measurement(&noon, 5000, 42).unwrap();
        let again = sample_measurement(&noon, 5000, 42).unwrap();
        assert_eq!(a, again);
        let other = sample_measurement(&noon, 5000, 43).unwrap();
        assert_ne!(a.counts, other.counts);
        assert_eq!(sample_measurement(&noon, 0, 1), Err(Error::NoShots));
    }

    #[test]
    fn phase_estimates() {
        let est = phase_estimate(500, 1000, 20).unwrap();
        assert!((est.phi_hat - PI / 2.0).abs() < 1e-15);
        assert!(!est.boundary);
        // mid-fringe: Δφ = 1/√shots
        assert!((est.std_error - 1000f64.sqrt().recip()).abs() < 1e-14);
        assert!((est.per_particle_error - est.std_error / 20.0).abs() < 1e-18);

        let top = phase_estimate(1000, 1000, 20).unwrap();
        assert!(top.boundary && top.phi_hat == 0.0 && top.std_error > 0.0);
        let bottom = phase_estimate(0, 1000, 20).unwrap();
        assert!(bottom.boundary && (bottom.phi_hat - PI).abs() < 1e-15);

        assert!(matches!(
            phase_estimate(11, 10, 2),
            Err(Error::CountsExceedShots { .. })
        ));
        assert_eq!(phase_estimate(0, 0, 2), Err(Error::NoShots));
    }

    fn arb_state(n: usize) -> impl Strategy<Value = StateVector> {
        proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n + 1).prop_filter_map(
            "zero vector",
            move |v| {
                let amps = v.into_iter().map(|(a, b)| C64::new(a, b)).collect();
                StateVector::normalized(basis(n), amps).ok()
            },
        )
    }

    proptest! {
        #[test]
        fn closed_form_matches_grid_search(state in (1usize..12).prop_flat_map(arb_state)) {
            let b = *state.basis();
            let fit = noon_max_fidelity(&state);
            let f = |phi: f64| crate::spin::fidelity(&noon_state(b, phi), &state).unwrap();
            let step = 2.0 * PI / 10_000.0;
            let (mut best_k, mut best) = (0usize, f64::NEG_INFINITY);
            for k in 0..10_000 {
                let value = f(step * k as f64);
                if value > best {
                    best = value;
                    best_k = k;
                }
            }
            // golden-section polish inside the bracketing grid cells
            let (mut lo, mut hi) = (step * (best_k as f64 - 1.0), step * (best_k as f64 + 1.0));
            let ratio = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..80 {
                let a = hi - ratio * (hi - lo);
                let c = lo + ratio * (hi - lo);
                if f(a) < f(c) { lo = a } else { hi = c }
            }
            let polished = best.max(f(0.5 * (lo + hi)));
            prop_assert!((fit.fidelity - polished).abs() <= 1e-8);
            let at_star = crate::spin::fidelity(&noon_state(b, fit.phase), &state).unwrap();
            prop_assert!((at_star - fit.fidelity).abs() <= 1e-8);
        }

        #[test]
        fn imprint_keeps_noon_fidelity(state in (1usize..12).prop_flat_map(arb_state), phi in -10.0..10.0f64) {
            let before = noon_max_fidelity(&state);
            let after = noon_max_fidelity(&phase_imprint(&state, phi));
            prop_assert!((before.fidelity - after.fidelity).abs() <= 1e-12);
            if before.phase_defined {
                prop_assert!(wrap_phase(after.phase - before.phase - phi).abs() <= 1e-9);
            }
        }
    }
}
