//! Numerical core for adiabatic Mach-Zehnder interferometry on a two-mode
//! Bose-Josephson junction.
//!
//! The junction is described in the angular-momentum picture, with
//! `H = δ·Jz − T·Jx + (E_C/2)·Jz²` acting on the `N + 1` dimensional
//! `|J = N/2, M⟩` ladder. Everything here is allocation-only `no_std` code:
//! file formats, CLI and parallel sweeps live in the `bjj` companion crate.
//!
//! Module map:
//!
//! * [`spin`]: basis, state vectors, coherent and NOON reference states.
//! * [`hamiltonian`]: the tridiagonal junction Hamiltonian.
//! * [`spectral`]: eigen-decomposition, gap scans, ground states.
//! * [`evolution`]: ramp schedules and the unitary Cayley integrator.
//! * [`protocol`]: split / imprint / recombine / detect pipeline.
//! * [`metrology`]: NOON fidelity, fringes, sampling and phase estimation.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod dense;
pub mod error;
pub mod evolution;
pub mod hamiltonian;
pub mod metrology;
pub mod protocol;
pub mod spectral;
pub mod spin;
mod tridiag;

pub use error::{Error, Result};
pub use evolution::{Sample, Schedule, Trajectory};
pub use hamiltonian::{JunctionParams, TridiagonalOperator};
pub use metrology::{MeasurementRecord, NoonFit, PhaseEstimate};
pub use protocol::{InterferenceResult, ProtocolConfig};
pub use spectral::{GapScanRow, Spectrum};
pub use spin::{HalfInt, JzDistribution, SpinBasis, StateVector};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
