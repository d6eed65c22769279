//! The interferometer pipeline: adiabatic split, phase imprint, adiabatic
//! recombination, and the imbalance-assisted detection ramp.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::evolution::{evolve, Schedule, Trajectory};
use crate::hamiltonian::{build_hamiltonian, JunctionParams};
use crate::metrology::{noon_max_fidelity, NoonFit};
use crate::spectral::{eig_lowest, ground_state, Spectrum};
use crate::spin::{jz_distribution, JzDistribution, SpinBasis, StateVector};
use crate::C64;

/// Minimum `coupling_max / |E_C|` treated as the strong-coupling limit.
pub const STRONG_COUPLING_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub n_particles: usize,
    /// `E_C`; must be negative.
    pub charging: f64,
    /// Strong-coupling endpoint of every ramp.
    pub coupling_max: f64,
    pub ramp_duration: f64,
    /// Imbalance held during splitting and recombination.
    pub delta_split: f64,
    /// Imbalance switched on for detection; `|δ| < |E_C|/2`.
    pub delta_detect: f64,
    /// Coupling at the end of the detection ramp.
    pub detect_final_coupling: f64,
    pub dt: f64,
    /// Trajectory sampling stride in steps.
    pub sample_every: usize,
    /// Proceed with a warning when `coupling_max < 10·|E_C|`.
    pub allow_weak_coupling: bool,
}

impl ProtocolConfig {
    /// `N = 20`, `E_C = −2`, `T: 40 → 0` over 40 time units, `δ_detect = |E_C|/4`.
    pub fn reference() -> Self {
        ProtocolConfig {
            n_particles: 20,
            charging: -2.0,
            coupling_max: 40.0,
            ramp_duration: 40.0,
            delta_split: 0.0,
            delta_detect: 0.5,
            detect_final_coupling: 0.0,
            dt: 1e-3,
            sample_every: 100,
            allow_weak_coupling: false,
        }
    }

    /// Reference setup for another particle number and charging energy, with
    /// the detection imbalance at `|E_C|/4`.
    pub fn with_junction(n_particles: usize, charging: f64) -> Self {
        ProtocolConfig {
            n_particles,
            charging,
            delta_detect: charging.abs() / 4.0,
            ..ProtocolConfig::reference()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(Error::NoParticles);
        }
        let fields = [
            (self.charging, "charging"),
            (self.coupling_max, "coupling_max"),
            (self.ramp_duration, "ramp_duration"),
            (self.delta_split, "delta_split"),
            (self.delta_detect, "delta_detect"),
            (self.detect_final_coupling, "detect_final_coupling"),
            (self.dt, "dt"),
        ];
        for (value, name) in fields {
            if !value.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        if !(self.charging < 0.0) {
            return Err(Error::NonNegativeCharging(self.charging));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidStep(self.dt));
        }
        if !(self.ramp_duration > 0.0) {
            return Err(Error::NonIncreasingTime);
        }
        let bound = STRONG_COUPLING_RATIO * self.charging.abs();
        if self.coupling_max < bound {
            if self.allow_weak_coupling {
                log::warn!(
                    "coupling_max = {} is below 10·|E_C| = {bound}; the endpoint is not deep in the strong-coupling limit",
                    self.coupling_max
                );
            } else {
                return Err(Error::WeakCoupling {
                    coupling_max: self.coupling_max,
                    bound,
                });
            }
        }
        let bound = self.charging.abs() / 2.0;
        if !(self.delta_detect.abs() < bound) {
            return Err(Error::BifurcationBound {
                delta: self.delta_detect.abs(),
                bound,
            });
        }
        Ok(())
    }

    pub fn basis(&self) -> Result<SpinBasis> {
        SpinBasis::new(self.n_particles)
    }

    /// Junction at the strong-coupling endpoint with the splitting imbalance.
    pub fn strong_coupling_params(&self) -> Result<JunctionParams> {
        JunctionParams::new(
            self.basis()?,
            self.delta_split,
            self.coupling_max,
            self.charging,
        )
    }

    pub fn split_schedule(&self) -> Result<Schedule> {
        Schedule::linear_ramp(
            self.basis()?,
            self.charging,
            0.0,
            self.ramp_duration,
            (self.delta_split, self.coupling_max),
            (self.delta_split, 0.0),
        )
    }

    pub fn recombine_schedule(&self) -> Result<Schedule> {
        Schedule::linear_ramp(
            self.basis()?,
            self.charging,
            0.0,
            self.ramp_duration,
            (self.delta_split, 0.0),
            (self.delta_split, self.coupling_max),
        )
    }

    pub fn detect_schedule(&self) -> Result<Schedule> {
        Schedule::linear_ramp(
            self.basis()?,
            self.charging,
            0.0,
            self.ramp_duration,
            (self.delta_detect, self.coupling_max),
            (self.delta_detect, self.detect_final_coupling),
        )
    }
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig::reference()
    }
}

/// Output of one interferometer run at phase `phase`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceResult {
    pub phase: f64,
    pub f0: f64,
    pub f1: f64,
    /// `1 − f0 − f1`.
    pub residual_leakage: f64,
}

/// First beam splitter with its diagnostics: ground state at strong coupling,
/// then the ramp `T: coupling_max → 0`.
pub fn split_trajectory(config: &ProtocolConfig) -> Result<Trajectory> {
    config.validate()?;
    let initial = ground_state(&config.strong_coupling_params()?)?;
    evolve(
        &initial,
        &config.split_schedule()?,
        config.dt,
        config.sample_every,
    )
}

pub fn split(config: &ProtocolConfig) -> Result<StateVector> {
    Ok(split_trajectory(config)?.final_state)
}

/// Diagonal phase shift `c_M ↦ e^{iφ(M+J)/(2J)}·c_M`; the `M = +J` component
/// gains `φ` relative to `M = −J`.
pub fn phase_imprint(state: &StateVector, phase: f64) -> StateVector {
    let basis = *state.basis();
    let n = basis.n_particles() as f64;
    let amplitudes = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, c)| c * C64::from_polar(1.0, phase * i as f64 / n))
        .collect();
    StateVector::from_amplitudes_unchecked(basis, amplitudes).expect("same basis")
}

/// Second beam splitter: `T: 0 → coupling_max` at the splitting imbalance.
pub fn recombine(state: &StateVector, config: &ProtocolConfig) -> Result<StateVector> {
    config.validate()?;
    Ok(evolve(state, &config.recombine_schedule()?, config.dt, 0)?.final_state)
}

/// Ground and first excited state of the strong-coupling endpoint.
pub fn readout_pair(config: &ProtocolConfig) -> Result<Spectrum> {
    eig_lowest(&build_hamiltonian(&config.strong_coupling_params()?), 2)
}

/// `(f0, f1)`: populations of the two lowest strong-coupling eigenstates.
pub fn readout(state: &StateVector, config: &ProtocolConfig) -> Result<(f64, f64)> {
    let pair = readout_pair(config)?;
    let basis = config.basis()?;
    let f0 = crate::spin::fidelity(&pair.eigenstate(0, basis)?, state)?;
    let f1 = crate::spin::fidelity(&pair.eigenstate(1, basis)?, state)?;
    Ok((f0, f1))
}

/// Sudden switch to `delta_detect`, then `T: coupling_max → detect_final_coupling`.
/// Returns the final state.
pub fn detect_state(state: &StateVector, config: &ProtocolConfig) -> Result<StateVector> {
    config.validate()?;
    Ok(evolve(state, &config.detect_schedule()?, config.dt, 0)?.final_state)
}

/// Jz populations after the detection ramp. Ground-state population ends up
/// at `M = −J`, first-excited population at `M = +J`.
pub fn detect(state: &StateVector, config: &ProtocolConfig) -> Result<JzDistribution> {
    Ok(jz_distribution(&detect_state(state, config)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaScanRow {
    pub delta: f64,
    pub fit: NoonFit,
}

pub fn delta_scan_point(config: &ProtocolConfig, delta: f64) -> Result<DeltaScanRow> {
    let config = ProtocolConfig {
        delta_split: delta,
        ..*config
    };
    let state = split(&config)?;
    Ok(DeltaScanRow {
        delta,
        fit: noon_max_fidelity(&state),
    })
}

/// Splitter NOON fidelity across imbalances, in grid order.
pub fn delta_scan(config: &ProtocolConfig, delta_grid: &[f64]) -> Result<Vec<DeltaScanRow>> {
    if delta_grid.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidGrid("imbalance grid has non-finite values"));
    }
    delta_grid
        .iter()
        .map(|&d| delta_scan_point(config, d))
        .collect()
}

/// Intermediate states of one end-to-end run.
#[derive(Debug, Clone, PartialEq)]
pub struct MzStages {
    pub split: StateVector,
    pub imprinted: StateVector,
    pub recombined: StateVector,
    pub result: InterferenceResult,
}

pub fn full_mz_stages(config: &ProtocolConfig, phase: f64) -> Result<MzStages> {
    let split = split(config)?;
    let imprinted = phase_imprint(&split, phase);
    let recombined = recombine(&imprinted, config)?;
    let (f0, f1) = readout(&recombined, config)?;
    Ok(MzStages {
        split,
        imprinted,
        recombined,
        result: InterferenceResult {
            phase,
            f0,
            f1,
            residual_leakage: 1.0 - f0 - f1,
        },
    })
}

/// `readout(recombine(phase_imprint(split(config), phase)))`.
pub fn full_mz(config: &ProtocolConfig, phase: f64) -> Result<InterferenceResult> {
    Ok(full_mz_stages(config, phase)?.result)
}
