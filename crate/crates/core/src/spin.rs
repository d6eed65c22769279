//! The `|J = N/2, M⟩` ladder, state vectors over it, and the reference states
//! of the interferometer.
//!
//! Amplitudes are stored densely in ascending-`M` order, so index `i`
//! corresponds to `M = i − J`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::C64;

/// Tolerance on `|Σ|c|² − 1|` accepted by the strict constructor.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// A half-integer stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(value: i64) -> Self {
        HalfInt(2 * value)
    }

    /// Parses a float that is exactly an integer or a half-integer.
    pub fn from_f64(value: f64) -> Option<Self> {
        let twice = value * 2.0;
        if twice.is_finite() && twice == twice.round() && twice.abs() < 9.0e15 {
            Some(HalfInt(twice as i64))
        } else {
            None
        }
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// The `N + 1` states `|N/2, M⟩`, `M = −N/2 ..= N/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinBasis {
    n_particles: usize,
}

impl SpinBasis {
    pub fn new(n_particles: usize) -> Result<Self> {
        if n_particles == 0 {
            return Err(Error::NoParticles);
        }
        Ok(SpinBasis { n_particles })
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn dim(&self) -> usize {
        self.n_particles + 1
    }

    /// Total spin `J = N/2`.
    pub fn j(&self) -> f64 {
        self.n_particles as f64 / 2.0
    }

    /// `M` of the basis state at `index`.
    pub fn m(&self, index: usize) -> HalfInt {
        HalfInt::from_twice(2 * index as i64 - self.n_particles as i64)
    }

    pub fn m_f64(&self, index: usize) -> f64 {
        self.m(index).to_f64()
    }

    pub fn index_of(&self, m: HalfInt) -> Result<usize> {
        let shifted = m.twice() + self.n_particles as i64;
        if shifted < 0 || shifted % 2 != 0 || shifted / 2 > self.n_particles as i64 {
            return Err(Error::OffLadder {
                m: m.to_f64(),
                j: self.j(),
            });
        }
        Ok((shifted / 2) as usize)
    }

    /// Ladder values in ascending order.
    pub fn ms(&self) -> impl Iterator<Item = HalfInt> + '_ {
        (0..self.dim()).map(move |i| self.m(i))
    }

    pub fn lowest(&self) -> HalfInt {
        self.m(0)
    }

    pub fn highest(&self) -> HalfInt {
        self.m(self.n_particles)
    }

    fn check_same(&self, other: &SpinBasis) -> Result<()> {
        if self != other {
            return Err(Error::BasisMismatch {
                left: self.n_particles,
                right: other.n_particles,
            });
        }
        Ok(())
    }
}

/// A normalized pure state over a [`SpinBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: SpinBasis,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized to [`NORM_TOLERANCE`].
    pub fn new(basis: SpinBasis, amplitudes: Vec<C64>) -> Result<Self> {
        check_len(&basis, amplitudes.len())?;
        let norm_sqr = norm_sqr(&amplitudes);
        if !((norm_sqr - 1.0).abs() <= NORM_TOLERANCE) {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(StateVector { basis, amplitudes })
    }

    /// Rescales any nonzero vector to unit norm.
    pub fn normalized(basis: SpinBasis, mut amplitudes: Vec<C64>) -> Result<Self> {
        check_len(&basis, amplitudes.len())?;
        let norm_sqr = norm_sqr(&amplitudes);
        if !(norm_sqr > 0.0 && norm_sqr.is_finite()) {
            return Err(Error::NotNormalized { norm_sqr });
        }
        let scale = 1.0 / norm_sqr.sqrt();
        for c in amplitudes.iter_mut() {
            *c *= scale;
        }
        Ok(StateVector { basis, amplitudes })
    }

    /// Skips the normalization check. Only the length is validated.
    ///
    /// Used for integrator output, where the norm itself is a diagnostic.
    pub fn from_amplitudes_unchecked(basis: SpinBasis, amplitudes: Vec<C64>) -> Result<Self> {
        check_len(&basis, amplitudes.len())?;
        Ok(StateVector { basis, amplitudes })
    }

    pub fn basis(&self) -> &SpinBasis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn amplitude(&self, m: HalfInt) -> Result<C64> {
        Ok(self.amplitudes[self.basis.index_of(m)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.basis.check_same(&other.basis)?;
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }
}

fn check_len(basis: &SpinBasis, len: usize) -> Result<()> {
    if len != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: len,
        });
    }
    Ok(())
}

pub(crate) fn norm_sqr(amplitudes: &[C64]) -> f64 {
    amplitudes.iter().map(|c| c.norm_sqr()).sum()
}

pub(crate) fn inner(bra: &[C64], ket: &[C64]) -> C64 {
    bra.iter().zip(ket).map(|(a, b)| a.conj() * b).sum()
}

/// Rotates the global phase so that the first nonzero amplitude is real and
/// non-negative.
pub(crate) fn fix_global_phase(amplitudes: &mut [C64]) {
    if let Some(first) = amplitudes.iter().find(|c| c.norm_sqr() > 0.0) {
        let rotation = first.conj() / first.norm();
        for c in amplitudes.iter_mut() {
            *c *= rotation;
        }
    }
}

/// The Jz eigenstate `|J, m⟩`.
pub fn basis_state(basis: SpinBasis, m: HalfInt) -> Result<StateVector> {
    let index = basis.index_of(m)?;
    let mut amplitudes = vec![C64::new(0.0, 0.0); basis.dim()];
    amplitudes[index] = C64::new(1.0, 0.0);
    Ok(StateVector { basis, amplitudes })
}

/// SU(2) spin coherent state pointing at polar angle `theta` from `+z` and
/// azimuth `phi`.
///
/// `c_M = √C(2J, J+M) · cos(θ/2)^(J+M) · sin(θ/2)^(J−M) · e^{iMφ}`, so
/// `theta = 0` is `|J, +J⟩` and `(π/2, 0)` is the binomial state with maximal
/// `⟨Jx⟩`.
pub fn coherent_state(basis: SpinBasis, theta: f64, phi: f64) -> StateVector {
    let n = basis.n_particles();
    let cos_half = (theta / 2.0).cos();
    let sin_half = (theta / 2.0).sin();
    let ln_cos = cos_half.abs().ln();
    let ln_sin = sin_half.abs().ln();

    let mut amplitudes = Vec::with_capacity(n + 1);
    // ln C(n, i), accumulated as i increases
    let mut ln_binom = 0.0;
    for i in 0..=n {
        if i > 0 {
            ln_binom += ((n - i + 1) as f64 / i as f64).ln();
        }
        let up = i;
        let down = n - i;
        if (up > 0 && cos_half == 0.0) || (down > 0 && sin_half == 0.0) {
            amplitudes.push(C64::new(0.0, 0.0));
            continue;
        }
        let mut log_mag = 0.5 * ln_binom;
        if up > 0 {
            log_mag += up as f64 * ln_cos;
        }
        if down > 0 {
            log_mag += down as f64 * ln_sin;
        }
        let negative = (cos_half < 0.0 && up % 2 == 1) ^ (sin_half < 0.0 && down % 2 == 1);
        let magnitude = if negative {
            -log_mag.exp()
        } else {
            log_mag.exp()
        };
        let m = basis.m_f64(i);
        amplitudes.push(C64::from_polar(1.0, m * phi) * magnitude);
    }
    let scale = 1.0 / norm_sqr(&amplitudes).sqrt();
    for c in amplitudes.iter_mut() {
        *c *= scale;
    }
    fix_global_phase(&mut amplitudes);
    StateVector { basis, amplitudes }
}

/// `(|J, −J⟩ + e^{iφ}|J, +J⟩)/√2`.
pub fn noon_state(basis: SpinBasis, phase: f64) -> StateVector {
    let mut amplitudes = vec![C64::new(0.0, 0.0); basis.dim()];
    let half = core::f64::consts::FRAC_1_SQRT_2;
    amplitudes[0] = C64::new(half, 0.0);
    amplitudes[basis.n_particles()] = C64::from_polar(half, phase);
    StateVector { basis, amplitudes }
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// Born-rule distribution of `Jz` outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct JzDistribution {
    pub basis: SpinBasis,
    /// `p_M`, ascending `M`.
    pub probabilities: Vec<f64>,
    pub mean_jz: f64,
    pub variance_jz: f64,
}

impl JzDistribution {
    pub fn probability(&self, m: HalfInt) -> Result<f64> {
        Ok(self.probabilities[self.basis.index_of(m)?])
    }

    /// Population of `M = −J`.
    pub fn p_lowest(&self) -> f64 {
        self.probabilities[0]
    }

    /// Population of `M = +J`.
    pub fn p_highest(&self) -> f64 {
        self.probabilities[self.basis.n_particles()]
    }
}

pub fn jz_distribution(state: &StateVector) -> JzDistribution {
    let basis = *state.basis();
    let probabilities: Vec<f64> = state.amplitudes().iter().map(|c| c.norm_sqr()).collect();
    let (mut mean, mut second) = (0.0, 0.0);
    for (i, p) in probabilities.iter().enumerate() {
        let m = basis.m_f64(i);
        mean += m * p;
        second += m * m * p;
    }
    JzDistribution {
        basis,
        probabilities,
        mean_jz: mean,
        variance_jz: second - mean * mean,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_1_SQRT_2, PI};

    fn basis(n: usize) -> SpinBasis {
        SpinBasis::new(n).unwrap()
    }

    #[test]
    fn basis_dimensions() {
        let b = basis(20);
        assert_eq!(b.dim(), 21);
        assert_eq!(b.j(), 10.0);
        let b = basis(1);
        assert_eq!((b.dim(), b.j()), (2, 0.5));
        let ms: Vec<f64> = basis(3).ms().map(HalfInt::to_f64).collect();
        assert_eq!(ms, [-1.5, -0.5, 0.5, 1.5]);
        assert_eq!(SpinBasis::new(0), Err(Error::NoParticles));
    }

    #[test]
    fn index_roundtrip_and_ladder_checks() {
        let b = basis(3);
        for i in 0..b.dim() {
            assert_eq!(b.index_of(b.m(i)).unwrap(), i);
        }
        // integer M is not on a half-integer ladder
        assert!(b.index_of(HalfInt::from_int(0)).is_err());
        assert!(b.index_of(HalfInt::from_twice(5)).is_err());
        assert_eq!(HalfInt::from_f64(-1.5), Some(HalfInt::from_twice(-3)));
        assert_eq!(HalfInt::from_f64(0.25), None);
    }

    #[test]
    fn basis_states() {
        let b = basis(20);
        let low = basis_state(b, HalfInt::from_int(-10)).unwrap();
        assert_eq!(low.amplitudes()[0], C64::new(1.0, 0.0));
        let high = basis_state(b, HalfInt::from_int(10)).unwrap();
        assert_eq!(high.amplitudes()[20], C64::new(1.0, 0.0));
        assert!(matches!(
            basis_state(b, HalfInt::from_int(11)),
            Err(Error::OffLadder { .. })
        ));
        assert_eq!(fidelity(&low, &high).unwrap(), 0.0);
    }

    #[test]
    fn coherent_two_particles() {
        let s = coherent_state(basis(2), PI / 2.0, 0.0);
        let expected = [0.5, FRAC_1_SQRT_2, 0.5];
        for (c, e) in s.amplitudes().iter().zip(expected) {
            assert!((c.re - e).abs() < 1e-15 && c.im == 0.0, "{c}");
        }
    }

    #[test]
    fn coherent_at_pole_is_top_state() {
        let b = basis(20);
        let top = basis_state(b, b.highest()).unwrap();
        for phi in [0.0, 1.0, -2.5] {
            let s = coherent_state(b, 0.0, phi);
            assert!((fidelity(&s, &top).unwrap() - 1.0).abs() < 1e-15);
        }
        // south pole
        let s = coherent_state(b, PI, 0.3);
        assert!((s.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_binomial_closed_form() {
        for n in [1usize, 2, 7, 20, 51] {
            let b = basis(n);
            let s = coherent_state(b, PI / 2.0, 0.0);
            let mut binom = 1.0f64;
            for i in 0..=n {
                if i > 0 {
                    binom = binom * (n - i + 1) as f64 / i as f64;
                }
                let expected = binom.sqrt() * 0.5f64.powi(n as i32).sqrt();
                let c = s.amplitudes()[i];
                assert!(c.im == 0.0 && c.re > 0.0);
                assert!(
                    (c.re - expected).abs() <= 1e-12 * expected.max(1e-3),
                    "n={n} i={i}"
                );
            }
            assert!((s.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE);
        }
    }

    #[test]
    fn coherent_large_n_stays_finite() {
        let s = coherent_state(basis(4000), PI / 2.0, 0.0);
        assert!((s.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE);
        assert!(s.amplitudes().iter().all(|c| c.re.is_finite()));
    }

    #[test]
    fn noon_states() {
        let b = basis(20);
        let plus = noon_state(b, 0.0);
        let minus = noon_state(b, PI);
        assert!((minus.amplitudes()[20].re + FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(fidelity(&plus, &minus).unwrap() < 1e-30);
        let low = basis_state(b, b.lowest()).unwrap();
        assert!((fidelity(&plus, &low).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fidelity_rejects_basis_mismatch() {
        let a = noon_state(basis(4), 0.0);
        let b = noon_state(basis(5), 0.0);
        assert_eq!(
            fidelity(&a, &b),
            Err(Error::BasisMismatch { left: 4, right: 5 })
        );
    }

    #[test]
    fn distributions() {
        let b = basis(20);
        let d = jz_distribution(&noon_state(b, 0.0));
        assert!((d.p_lowest() - 0.5).abs() < 1e-15 && (d.p_highest() - 0.5).abs() < 1e-15);
        assert!(d.mean_jz.abs() < 1e-13);
        assert!((d.variance_jz - 100.0).abs() < 1e-12);

        let d = jz_distribution(&basis_state(b, b.highest()).unwrap());
        assert_eq!((d.mean_jz, d.variance_jz), (10.0, 0.0));

        let d = jz_distribution(&coherent_state(b, PI / 2.0, 0.0));
        // C(20,10) / 2^20
        assert!(
            (d.probability(HalfInt::from_int(0)).unwrap() - 184756.0 / 1048576.0).abs() < 1e-14
        );
        assert!((d.probabilities[10] - 0.17620).abs() < 5e-6);
        assert!((d.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn strict_constructor_checks_norm() {
        let b = basis(1);
        let amps = alloc::vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        assert!(matches!(
            StateVector::new(b, amps.clone()),
            Err(Error::NotNormalized { .. })
        ));
        let s = StateVector::normalized(b, amps).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        assert!(StateVector::new(b, alloc::vec![C64::new(1.0, 0.0)]).is_err());
    }
}
