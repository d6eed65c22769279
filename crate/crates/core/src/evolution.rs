//! Time evolution `i·dψ/dt = H(t)·ψ` under piecewise-linear schedules of the
//! imbalance and coupling.
//!
//! Each step applies the Cayley map `(1 + i·h/2·H)⁻¹(1 − i·h/2·H)` with `H`
//! taken at the step midpoint. The map is exactly unitary for any step size
//! and second order accurate; each step costs one tridiagonal solve.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, JunctionParams};
use crate::spectral::eig_lowest;
use crate::spin::{inner, norm_sqr, SpinBasis, StateVector};
use crate::tridiag::solve_in_place;
use crate::C64;

/// Steps finer than this are not accepted as a convergence reference.
pub const MIN_REFERENCE_DT: f64 = 1e-6;

/// Tolerance on the squared norm of an initial state.
const INITIAL_NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakpoint {
    pub time: f64,
    pub delta: f64,
    pub coupling: f64,
}

/// Piecewise-linear program for `(δ(t), T(t))` at fixed `E_C`.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    basis: SpinBasis,
    charging: f64,
    breakpoints: Vec<Breakpoint>,
}

impl Schedule {
    pub fn new(basis: SpinBasis, charging: f64, breakpoints: Vec<Breakpoint>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::TooFewBreakpoints);
        }
        if !charging.is_finite() {
            return Err(Error::NonFinite("charging"));
        }
        for b in &breakpoints {
            if !(b.time.is_finite() && b.delta.is_finite() && b.coupling.is_finite()) {
                return Err(Error::NonFinite("breakpoint"));
            }
        }
        if breakpoints.windows(2).any(|w| !(w[1].time > w[0].time)) {
            return Err(Error::NonIncreasingTime);
        }
        Ok(Schedule {
            basis,
            charging,
            breakpoints,
        })
    }

    /// Two-breakpoint schedule, linear in both `δ` and `T`. `from` and `to`
    /// are `(δ, T)` pairs.
    pub fn linear_ramp(
        basis: SpinBasis,
        charging: f64,
        t_start: f64,
        t_end: f64,
        from: (f64, f64),
        to: (f64, f64),
    ) -> Result<Self> {
        Schedule::new(
            basis,
            charging,
            vec![
                Breakpoint {
                    time: t_start,
                    delta: from.0,
                    coupling: from.1,
                },
                Breakpoint {
                    time: t_end,
                    delta: to.0,
                    coupling: to.1,
                },
            ],
        )
    }

    pub fn basis(&self) -> &SpinBasis {
        &self.basis
    }

    pub fn charging(&self) -> f64 {
        self.charging
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0].time
    }

    pub fn end(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1].time
    }

    pub fn duration(&self) -> f64 {
        self.end() - self.start()
    }

    /// `(δ(t), T(t))`, held constant outside the breakpoint range.
    pub fn at(&self, t: f64) -> (f64, f64) {
        let bp = &self.breakpoints;
        if t <= bp[0].time {
            return (bp[0].delta, bp[0].coupling);
        }
        let last = bp[bp.len() - 1];
        if t >= last.time {
            return (last.delta, last.coupling);
        }
        let seg = bp.partition_point(|b| b.time <= t).max(1) - 1;
        let (a, b) = (bp[seg], bp[seg + 1]);
        let w = (t - a.time) / (b.time - a.time);
        (
            a.delta + w * (b.delta - a.delta),
            a.coupling + w * (b.coupling - a.coupling),
        )
    }

    pub fn params_at(&self, t: f64) -> JunctionParams {
        let (delta, coupling) = self.at(t);
        JunctionParams {
            basis: self.basis,
            delta,
            coupling,
            charging: self.charging,
        }
    }

    /// The same program run backwards: `t ↦ start + end − t`.
    pub fn reversed(&self) -> Schedule {
        let (start, end) = (self.start(), self.end());
        let breakpoints = self
            .breakpoints
            .iter()
            .rev()
            .map(|b| Breakpoint {
                time: start + end - b.time,
                ..*b
            })
            .collect();
        Schedule {
            basis: self.basis,
            charging: self.charging,
            breakpoints,
        }
    }
}

/// Diagnostics recorded along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub delta: f64,
    pub coupling: f64,
    pub norm: f64,
    /// Population of the instantaneous ground state.
    pub f0: f64,
    /// Population of the instantaneous first excited state.
    pub f1: f64,
    /// `f0 + f1`; insensitive to the basis choice inside a degenerate pair.
    pub subspace_population: f64,
    pub mean_jz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub final_state: StateVector,
}

impl Trajectory {
    pub fn max_norm_drift(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.norm - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_subspace_population(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.subspace_population)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Fixed step grid covering a schedule.
#[derive(Debug, Clone, Copy)]
struct StepGrid {
    start: f64,
    step: f64,
    count: usize,
}

impl StepGrid {
    fn new(schedule: &Schedule, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidStep(dt));
        }
        let duration = schedule.duration();
        if dt > duration {
            return Err(Error::StepTooLong { dt, duration });
        }
        // step shrinks to fit a whole number of steps into the schedule
        let count = ((duration / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Ok(StepGrid {
            start: schedule.start(),
            step: duration / count as f64,
            count,
        })
    }

    fn time(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    fn midpoint(&self, k: usize) -> f64 {
        self.start + (k as f64 + 0.5) * self.step
    }
}

/// Reusable buffers for the Cayley step.
struct Stepper<'a> {
    schedule: &'a Schedule,
    lower: Vec<C64>,
    diag: Vec<C64>,
    upper: Vec<C64>,
    rhs: Vec<C64>,
}

impl<'a> Stepper<'a> {
    fn new(schedule: &'a Schedule) -> Self {
        let n = schedule.basis().dim();
        Stepper {
            schedule,
            lower: vec![C64::new(0.0, 0.0); n - 1],
            diag: vec![C64::new(0.0, 0.0); n],
            upper: vec![C64::new(0.0, 0.0); n - 1],
            rhs: vec![C64::new(0.0, 0.0); n],
        }
    }

    /// Advances `psi` by the signed step `h` with `H` frozen at `t_mid`.
    fn step(&mut self, psi: &mut [C64], t_mid: f64, h: f64) {
        let op = build_hamiltonian(&self.schedule.params_at(t_mid));
        let d = op.diagonal();
        let e = op.off_diagonal();
        let n = d.len();
        let half = C64::new(0.0, 0.5 * h);
        for i in 0..n {
            let mut hpsi = psi[i] * d[i];
            if i > 0 {
                hpsi += psi[i - 1] * e[i - 1];
            }
            if i + 1 < n {
                hpsi += psi[i + 1] * e[i];
            }
            self.rhs[i] = psi[i] - half * hpsi;
            self.diag[i] = C64::new(1.0, 0.0) + half * d[i];
        }
        for ((lo, up), &ei) in self.lower.iter_mut().zip(self.upper.iter_mut()).zip(e) {
            *lo = half * ei;
            *up = half * ei;
        }
        solve_in_place(
            &mut self.lower,
            &mut self.diag,
            &mut self.upper,
            &mut self.rhs,
            0.0,
            |c: C64| c.norm(),
        );
        psi.copy_from_slice(&self.rhs);
    }
}

fn check_state(state: &StateVector, schedule: &Schedule) -> Result<()> {
    if state.basis() != schedule.basis() {
        return Err(Error::BasisMismatch {
            left: state.basis().n_particles(),
            right: schedule.basis().n_particles(),
        });
    }
    let norm_sqr = state.norm_sqr();
    if !((norm_sqr - 1.0).abs() <= INITIAL_NORM_TOLERANCE) {
        return Err(Error::NotNormalized { norm_sqr });
    }
    Ok(())
}

fn sample(psi: &[C64], schedule: &Schedule, t: f64) -> Result<Sample> {
    let params = schedule.params_at(t);
    let pair = eig_lowest(&build_hamiltonian(&params), 2)?;
    let overlap = |v: &[f64]| -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for (c, x) in psi.iter().zip(v) {
            acc += c * x;
        }
        acc.norm_sqr()
    };
    let f0 = overlap(&pair.eigenvectors[0]);
    let f1 = overlap(&pair.eigenvectors[1]);
    let basis = schedule.basis();
    let mean_jz = psi
        .iter()
        .enumerate()
        .map(|(i, c)| basis.m_f64(i) * c.norm_sqr())
        .sum();
    Ok(Sample {
        time: t,
        delta: params.delta,
        coupling: params.coupling,
        norm: norm_sqr(psi).sqrt(),
        f0,
        f1,
        subspace_population: f0 + f1,
        mean_jz,
    })
}

/// Integrates `initial` across `schedule`, recording a [`Sample`] at the
/// start, every `sample_every` steps and at the end. `sample_every = 0`
/// records the endpoints only.
pub fn evolve(
    initial: &StateVector,
    schedule: &Schedule,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    check_state(initial, schedule)?;
    let grid = StepGrid::new(schedule, dt)?;
    let mut stepper = Stepper::new(schedule);
    let mut psi = initial.amplitudes().to_vec();
    let mut samples = vec![sample(&psi, schedule, grid.time(0))?];
    for k in 0..grid.count {
        stepper.step(&mut psi, grid.midpoint(k), grid.step);
        let done = k + 1;
        if done == grid.count || (sample_every > 0 && done % sample_every == 0) {
            let t = if done == grid.count {
                schedule.end()
            } else {
                grid.time(done)
            };
            samples.push(sample(&psi, schedule, t)?);
        }
    }
    Ok(Trajectory {
        samples,
        final_state: StateVector::from_amplitudes_unchecked(*schedule.basis(), psi)?,
    })
}

/// Integrates without diagnostics or normalization checks. Linear in `amplitudes`.
pub fn propagate_raw(amplitudes: &[C64], schedule: &Schedule, dt: f64) -> Result<Vec<C64>> {
    let dim = schedule.basis().dim();
    if amplitudes.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: amplitudes.len(),
        });
    }
    let grid = StepGrid::new(schedule, dt)?;
    let mut stepper = Stepper::new(schedule);
    let mut psi = amplitudes.to_vec();
    for k in 0..grid.count {
        stepper.step(&mut psi, grid.midpoint(k), grid.step);
    }
    Ok(psi)
}

/// Runs the schedule backwards in time from its end, i.e. applies the
/// adjoint of the forward propagator on the same step grid.
pub fn evolve_backward(
    final_state: &StateVector,
    schedule: &Schedule,
    dt: f64,
) -> Result<StateVector> {
    check_state(final_state, schedule)?;
    let grid = StepGrid::new(schedule, dt)?;
    let mut stepper = Stepper::new(schedule);
    let mut psi = final_state.amplitudes().to_vec();
    for k in (0..grid.count).rev() {
        stepper.step(&mut psi, grid.midpoint(k), -grid.step);
    }
    StateVector::from_amplitudes_unchecked(*schedule.basis(), psi)
}

/// Errors of runs at `dt` and `dt/2` against a `dt/8` reference, measured
/// as `min_α ‖ψ − e^{iα}·ψ_ref‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub error_dt: f64,
    pub error_dt_half: f64,
    /// `log₂(error_dt / error_dt_half)`.
    pub observed_order: f64,
}

pub fn convergence_check(
    initial: &StateVector,
    schedule: &Schedule,
    dt: f64,
) -> Result<Convergence> {
    check_state(initial, schedule)?;
    StepGrid::new(schedule, dt)?;
    if dt / 8.0 < MIN_REFERENCE_DT {
        return Err(Error::ReferenceResolution(dt));
    }
    let amps = initial.amplitudes();
    let reference = propagate_raw(amps, schedule, dt / 8.0)?;
    // each run is phase-aligned to the reference first
    let distance = |psi: Vec<C64>| -> f64 {
        let overlap = inner(&psi, &reference);
        let align = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        psi.iter()
            .zip(&reference)
            .map(|(a, b)| (a * align - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let error_dt = distance(propagate_raw(amps, schedule, dt)?);
    let error_dt_half = distance(propagate_raw(amps, schedule, dt / 2.0)?);
    Ok(Convergence {
        error_dt,
        error_dt_half,
        observed_order: (error_dt / error_dt_half).log2(),
    })
}
