//! The two-mode junction Hamiltonian `H = δ·Jz − T·Jx + (E_C/2)·Jz²`.
//!
//! In the Jz basis `H` is real symmetric tridiagonal: the diagonal carries the
//! imbalance and charging terms, the single off-diagonal carries the tunnel
//! coupling through `⟨M+1|Jx|M⟩ = ½√((J−M)(J+M+1))`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::spin::SpinBasis;
use crate::C64;

/// Instantaneous junction knobs. Units are dimensionless with `ħ = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionParams {
    pub basis: SpinBasis,
    /// Imbalance `δ`.
    pub delta: f64,
    /// Tunnel coupling `T`.
    pub coupling: f64,
    /// Charging energy `E_C`.
    pub charging: f64,
}

impl JunctionParams {
    pub fn new(basis: SpinBasis, delta: f64, coupling: f64, charging: f64) -> Result<Self> {
        for (value, name) in [
            (delta, "delta"),
            (coupling, "coupling"),
            (charging, "charging"),
        ] {
            if !value.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        Ok(JunctionParams {
            basis,
            delta,
            coupling,
            charging,
        })
    }

    pub fn with_coupling(self, coupling: f64) -> Self {
        JunctionParams { coupling, ..self }
    }

    pub fn with_delta(self, delta: f64) -> Self {
        JunctionParams { delta, ..self }
    }
}

/// Real symmetric tridiagonal matrix, stored as its diagonal and the single
/// sub/super-diagonal. `off_diagonal[i]` couples rows `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    diagonal: Vec<f64>,
    off_diagonal: Vec<f64>,
}

impl TridiagonalOperator {
    pub fn new(diagonal: Vec<f64>, off_diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.is_empty() || off_diagonal.len() + 1 != diagonal.len() {
            return Err(Error::DimensionMismatch {
                expected: diagonal.len().saturating_sub(1),
                got: off_diagonal.len(),
            });
        }
        Ok(TridiagonalOperator {
            diagonal,
            off_diagonal,
        })
    }

    pub fn zero(dim: usize) -> Self {
        TridiagonalOperator {
            diagonal: vec![0.0; dim],
            off_diagonal: vec![0.0; dim.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    /// Maximum absolute row sum, `‖H‖_∞`.
    pub fn inf_norm(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut row = self.diagonal[i].abs();
                if i > 0 {
                    row += self.off_diagonal[i - 1].abs();
                }
                if i + 1 < n {
                    row += self.off_diagonal[i].abs();
                }
                row
            })
            .fold(0.0, f64::max)
    }

    /// `y = H·x`. The result is not renormalized.
    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        let mut y: Vec<C64> = self.diagonal.iter().zip(x).map(|(d, v)| v * d).collect();
        for (i, e) in self.off_diagonal.iter().enumerate() {
            y[i] += x[i + 1] * e;
            y[i + 1] += x[i] * e;
        }
        Ok(y)
    }

    /// Real-vector variant of [`apply`](Self::apply), used by the eigensolver.
    pub(crate) fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.dim() {
            y[i] = self.diagonal[i] * x[i];
        }
        for (i, e) in self.off_diagonal.iter().enumerate() {
            y[i] += e * x[i + 1];
            y[i + 1] += e * x[i];
        }
    }
}

/// Builds `H` in the ascending-`M` Jz basis.
pub fn build_hamiltonian(params: &JunctionParams) -> TridiagonalOperator {
    let basis = params.basis;
    let n = basis.n_particles();
    let diagonal = (0..=n)
        .map(|i| {
            let m = basis.m_f64(i);
            params.delta * m + 0.5 * params.charging * m * m
        })
        .collect();
    // J(J+1) − M(M+1) = (J−M)(J+M+1) = (n−i)(i+1) with M = i − J
    let off_diagonal = (0..n)
        .map(|i| -0.5 * params.coupling * (((n - i) * (i + 1)) as f64).sqrt())
        .collect();
    TridiagonalOperator {
        diagonal,
        off_diagonal,
    }
}

/// `λ = N·|E_C| / (2T)`.
pub fn lambda_param(n_particles: usize, charging: f64, coupling: f64) -> Result<f64> {
    if coupling == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    Ok(n_particles as f64 * charging.abs() / (2.0 * coupling))
}
