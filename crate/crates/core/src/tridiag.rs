//! Gaussian elimination with partial pivoting for a general tridiagonal system
//! (the `gtsv` scheme), generic over real and complex scalars.

use core::ops::{Div, Mul, Sub};

/// Solves `A·x = b` in place, where `A` has sub-diagonal `lower`, diagonal
/// `diag` and super-diagonal `upper`. All three bands are destroyed.
///
/// A pivot whose magnitude is exactly zero is replaced by `zero_pivot`; pass
/// `0.0` when `A` is known to be nonsingular.
pub(crate) fn solve_in_place<T>(
    lower: &mut [T],
    diag: &mut [T],
    upper: &mut [T],
    rhs: &mut [T],
    zero_pivot: f64,
    magnitude: impl Fn(T) -> f64,
) where
    T: Copy + From<f64> + Sub<Output = T> + Mul<Output = T> + Div<Output = T>,
{
    let n = diag.len();
    debug_assert!(lower.len() + 1 == n && upper.len() + 1 == n && rhs.len() == n);
    let fix = |v: T| {
        if magnitude(v) == 0.0 {
            T::from(zero_pivot)
        } else {
            v
        }
    };
    let zero = T::from(0.0);

    for i in 0..n.saturating_sub(1) {
        if magnitude(diag[i]) >= magnitude(lower[i]) {
            diag[i] = fix(diag[i]);
            let fact = lower[i] / diag[i];
            diag[i + 1] = diag[i + 1] - fact * upper[i];
            rhs[i + 1] = rhs[i + 1] - fact * rhs[i];
            // lower[i] now holds the second super-diagonal
            lower[i] = zero;
        } else {
            let fact = diag[i] / lower[i];
            diag[i] = lower[i];
            let temp = diag[i + 1];
            diag[i + 1] = upper[i] - fact * temp;
            if i + 2 < n {
                lower[i] = upper[i + 1];
                upper[i + 1] = zero - fact * lower[i];
            } else {
                lower[i] = zero;
            }
            upper[i] = temp;
            let temp = rhs[i];
            rhs[i] = rhs[i + 1];
            rhs[i + 1] = temp - fact * rhs[i + 1];
        }
    }

    diag[n - 1] = fix(diag[n - 1]);
    rhs[n - 1] = rhs[n - 1] / diag[n - 1];
    if n > 1 {
        rhs[n - 2] = (rhs[n - 2] - upper[n - 2] * rhs[n - 1]) / diag[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1] - lower[i] * rhs[i + 2]) / diag[i];
    }
}
