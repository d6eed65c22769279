//! Eigen-decomposition of the symmetric tridiagonal junction Hamiltonian.
//!
//! Two independent routes are provided: [`eig_full`] runs implicit-shift QL on
//! the whole matrix, [`eig_lowest`] finds the lowest few eigenvalues by Sturm
//! bisection and their vectors by inverse iteration. Both finish through the
//! same canonicalization so that their outputs can be compared directly:
//!
//! * eigenvalues whose spacing is at most [`degeneracy_tolerance`] form a
//!   cluster, and the vectors of a cluster are rotated into the eigenbasis of
//!   `Jz` restricted to it, ordered by ascending `⟨Jz⟩`; for a diagonal
//!   operator this yields basis states in ascending `M`;
//! * every vector is signed so that its largest-magnitude component (lowest
//!   index among near-ties) is positive.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::dense::symmetric_eigen;
use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, JunctionParams, TridiagonalOperator};
use crate::spin::{SpinBasis, StateVector};
use crate::tridiag::solve_in_place;
use crate::C64;

/// Relative spacing (in units of `‖H‖_∞`) below which eigenvalues are
/// treated as one degenerate cluster.
pub const DEGENERACY_RELATIVE: f64 = 1e-11;

/// Ground gap below which [`ground_state`] warns that the returned vector is
/// fixed by convention only.
pub const DEGENERATE_GAP_WARNING: f64 = 1e-10;

const QL_MAX_ITER: usize = 60;
const INVERSE_ITER_MAX: usize = 8;

pub fn degeneracy_tolerance(op: &TridiagonalOperator) -> f64 {
    DEGENERACY_RELATIVE * op.inf_norm()
}

/// Eigenpairs of a real symmetric operator, ascending in energy.
///
/// Eigenvectors are real (the operator is real symmetric) and stored over the
/// ascending-`M` index.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvector `k` as a state over `basis`.
    pub fn eigenstate(&self, k: usize, basis: SpinBasis) -> Result<StateVector> {
        let amplitudes = self.eigenvectors[k]
            .iter()
            .map(|&x| C64::new(x, 0.0))
            .collect();
        StateVector::from_amplitudes_unchecked(basis, amplitudes)
    }

    /// `‖H v_k − λ_k v_k‖₂`.
    pub fn residual(&self, op: &TridiagonalOperator, k: usize) -> f64 {
        let v = &self.eigenvectors[k];
        let mut hv = vec![0.0; v.len()];
        op.apply_real(v, &mut hv);
        hv.iter()
            .zip(v)
            .map(|(a, b)| {
                let r = a - self.eigenvalues[k] * b;
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Complete eigensystem by implicit-shift QL.
pub fn eig_full(op: &TridiagonalOperator) -> Result<Spectrum> {
    let n = op.dim();
    let mut values = op.diagonal().to_vec();
    let mut work = op.off_diagonal().to_vec();
    work.push(0.0);
    let mut vectors: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let mut v = vec![0.0; n];
            v[k] = 1.0;
            v
        })
        .collect();
    ql_implicit(&mut values, &mut work, Some(&mut vectors))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut spectrum = Spectrum {
        eigenvalues: order.iter().map(|&k| values[k]).collect(),
        eigenvectors: order
            .iter()
            .map(|&k| core::mem::take(&mut vectors[k]))
            .collect(),
    };
    canonicalize(&mut spectrum, degeneracy_tolerance(op));
    Ok(spectrum)
}

/// All eigenvalues, ascending, without vectors. `O(dim²)`.
pub fn eigenvalues(op: &TridiagonalOperator) -> Result<Vec<f64>> {
    let mut values = op.diagonal().to_vec();
    let mut work = op.off_diagonal().to_vec();
    work.push(0.0);
    ql_implicit(&mut values, &mut work, None)?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// The `k` lowest eigenpairs by bisection and inverse iteration.
pub fn eig_lowest(op: &TridiagonalOperator, k: usize) -> Result<Spectrum> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::LevelCount { k, dim: n });
    }
    let tol = degeneracy_tolerance(op);
    let sturm = Sturm::new(op);

    let mut values: Vec<f64> = (0..k).map(|i| sturm.bisect(i)).collect();
    // a cluster straddling the cut must be canonicalized as a whole
    while values.len() < n {
        let next = sturm.bisect(values.len());
        if next - values[values.len() - 1] <= tol {
            values.push(next);
        } else {
            break;
        }
    }

    let norm = op.inf_norm();
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(values.len());
    for (j, &lambda) in values.iter().enumerate() {
        let v = inverse_iteration(op, lambda, j, &values, &vectors, norm);
        vectors.push(v);
    }

    let mut spectrum = Spectrum {
        eigenvalues: values,
        eigenvectors: vectors,
    };
    canonicalize(&mut spectrum, tol);
    spectrum.eigenvalues.truncate(k);
    spectrum.eigenvectors.truncate(k);
    Ok(spectrum)
}

/// One row of a coupling scan.
#[derive(Debug, Clone, PartialEq)]
pub struct GapScanRow {
    pub coupling: f64,
    /// The `k` lowest eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// `E₁ − E₀`.
    pub gap01: f64,
}

pub fn gap_scan_row(base: &JunctionParams, coupling: f64, k: usize) -> Result<GapScanRow> {
    let dim = base.basis.dim();
    if k == 0 || k > dim {
        return Err(Error::LevelCount { k, dim });
    }
    let params = JunctionParams::new(base.basis, base.delta, coupling, base.charging)?;
    let all = eigenvalues(&build_hamiltonian(&params))?;
    Ok(GapScanRow {
        coupling,
        gap01: all[1] - all[0],
        eigenvalues: all[..k].to_vec(),
    })
}

/// Lowest `k` levels and the ground gap at every coupling of the grid, in
/// grid order.
pub fn gap_scan(base: &JunctionParams, coupling_grid: &[f64], k: usize) -> Result<Vec<GapScanRow>> {
    if coupling_grid.is_empty() {
        return Err(Error::InvalidGrid("coupling grid is empty"));
    }
    coupling_grid
        .iter()
        .map(|&t| gap_scan_row(base, t, k))
        .collect()
}

/// Lowest eigenvector of `H(params)`.
pub fn ground_state(params: &JunctionParams) -> Result<StateVector> {
    let op = build_hamiltonian(params);
    let spectrum = eig_lowest(&op, 2)?;
    let gap = spectrum.eigenvalues[1] - spectrum.eigenvalues[0];
    if gap < DEGENERATE_GAP_WARNING {
        log::warn!(
            "ground space is degenerate (gap {gap:e}) at δ={}, T={}; returning the convention-fixed vector",
            params.delta,
            params.coupling
        );
    }
    spectrum.eigenstate(0, params.basis)
}

fn ql_implicit(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [Vec<f64>]>) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITER {
                return Err(Error::NoConvergence);
            }
            // Wilkinson-style shift from the leading 2x2 block
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let (left, right) = z.split_at_mut(i + 1);
                    let (zi, zj) = (&mut left[i], &mut right[0]);
                    for (a, b) in zi.iter_mut().zip(zj.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Sturm-sequence eigenvalue counting on the `LDLᵀ` pivots of `H − x`.
struct Sturm<'a> {
    diag: &'a [f64],
    off_sqr: Vec<f64>,
    pivmin: f64,
    lower: f64,
    upper: f64,
}

impl<'a> Sturm<'a> {
    fn new(op: &'a TridiagonalOperator) -> Self {
        let diag = op.diagonal();
        let off = op.off_diagonal();
        let off_sqr: Vec<f64> = off.iter().map(|e| e * e).collect();
        let pivmin = f64::MIN_POSITIVE * off_sqr.iter().copied().fold(1.0, f64::max);
        let n = diag.len();
        let (mut lower, mut upper) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let mut radius = 0.0;
            if i > 0 {
                radius += off[i - 1].abs();
            }
            if i + 1 < n {
                radius += off[i].abs();
            }
            lower = lower.min(diag[i] - radius);
            upper = upper.max(diag[i] + radius);
        }
        let slack = 2.0 * f64::EPSILON * lower.abs().max(upper.abs()) * n as f64 + pivmin;
        Sturm {
            diag,
            off_sqr,
            pivmin,
            lower: lower - slack,
            upper: upper + slack,
        }
    }

    /// Number of eigenvalues strictly below `x`.
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for (i, &d) in self.diag.iter().enumerate() {
            q = if i == 0 {
                d - x
            } else {
                d - x - self.off_sqr[i - 1] / q
            };
            if q.abs() <= self.pivmin {
                q = -self.pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Eigenvalue `index` (0-based, ascending), bisected to full precision.
    fn bisect(&self, index: usize) -> f64 {
        let (mut lo, mut hi) = (self.lower, self.upper);
        for _ in 0..2100 {
            let mid = lo + 0.5 * (hi - lo);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo + 0.5 * (hi - lo)
    }
}

fn start_vector(n: usize, seed: usize) -> Vec<f64> {
    // fixed, deterministic, and generic enough to overlap every eigenvector
    let mut state = 0x9E37_79B9_7F4A_7C15u64 ^ (seed as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

fn orthogonalize(v: &mut [f64], against: &[&Vec<f64>]) {
    for _pass in 0..2 {
        for u in against {
            let dot: f64 = v.iter().zip(u.iter()).map(|(a, b)| a * b).sum();
            for (a, b) in v.iter_mut().zip(u.iter()) {
                *a -= dot * b;
            }
        }
    }
}

fn inverse_iteration(
    op: &TridiagonalOperator,
    lambda: f64,
    j: usize,
    values: &[f64],
    previous: &[Vec<f64>],
    norm: f64,
) -> Vec<f64> {
    let n = op.dim();
    let scale = norm.max(f64::MIN_POSITIVE);
    // vectors of nearby eigenvalues must be kept mutually orthogonal
    let ortho_window = 1e-3 * scale;
    let neighbours: Vec<&Vec<f64>> = previous
        .iter()
        .enumerate()
        .filter(|(i, _)| (values[j] - values[*i]).abs() <= ortho_window)
        .map(|(_, v)| v)
        .collect();

    let mut v = start_vector(n, j);
    orthogonalize(&mut v, &neighbours);
    normalize(&mut v);
    let mut hv = vec![0.0; n];
    for iter in 0..INVERSE_ITER_MAX {
        let mut lower = op.off_diagonal().to_vec();
        let mut upper = lower.clone();
        let mut diag: Vec<f64> = op.diagonal().iter().map(|d| d - lambda).collect();
        solve_in_place(
            &mut lower,
            &mut diag,
            &mut upper,
            &mut v,
            f64::EPSILON * scale,
            f64::abs,
        );
        orthogonalize(&mut v, &neighbours);
        if normalize(&mut v) == 0.0 {
            v = start_vector(n, j + 7919 * (iter + 1));
            orthogonalize(&mut v, &neighbours);
            normalize(&mut v);
            continue;
        }
        if iter >= 1 {
            op.apply_real(&v, &mut hv);
            let residual = hv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - lambda * b) * (a - lambda * b))
                .sum::<f64>()
                .sqrt();
            if residual <= 1e-13 * scale {
                break;
            }
        }
    }
    v
}

fn canonicalize(spectrum: &mut Spectrum, tol: f64) {
    let count = spectrum.len();
    let mut start = 0;
    while start < count {
        let mut end = start + 1;
        while end < count && spectrum.eigenvalues[end] - spectrum.eigenvalues[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            rotate_to_jz(&mut spectrum.eigenvectors[start..end]);
        }
        start = end;
    }
    for v in spectrum.eigenvectors.iter_mut() {
        fix_sign(v);
    }
}

/// Rotates an orthonormal set onto the eigenbasis of `Jz` restricted to its
/// span, ascending in `⟨Jz⟩`.
fn rotate_to_jz(vectors: &mut [Vec<f64>]) {
    let c = vectors.len();
    let n = vectors[0].len();
    let half = (n - 1) as f64 / 2.0;
    let mut projected = vec![0.0; c * c];
    for a in 0..c {
        for b in a..c {
            let value: f64 = (0..n)
                .map(|i| (i as f64 - half) * vectors[a][i] * vectors[b][i])
                .sum();
            projected[a * c + b] = value;
            projected[b * c + a] = value;
        }
    }
    let (_, rotation) = symmetric_eigen(projected, c);
    let rotated: Vec<Vec<f64>> = (0..c)
        .map(|col| {
            let mut v = vec![0.0; n];
            for (b, vb) in vectors.iter().enumerate() {
                let w = rotation[b * c + col];
                for (x, y) in v.iter_mut().zip(vb) {
                    *x += w * y;
                }
            }
            normalize(&mut v);
            v
        })
        .collect();
    for (slot, v) in vectors.iter_mut().zip(rotated) {
        *slot = v;
    }
}

fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(pivot) = v.iter().position(|x| x.abs() >= max * (1.0 - 1e-8)) {
        if v[pivot] < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{basis_state, coherent_state, fidelity};
    use core::f64::consts::PI;

    fn params(n: usize, delta: f64, coupling: f64, charging: f64) -> JunctionParams {
        JunctionParams::new(SpinBasis::new(n).unwrap(), delta, coupling, charging).unwrap()
    }

    #[test]
    fn diagonal_degenerate_pair_is_ordered_by_m() {
        let op = build_hamiltonian(&params(20, 0.0, 0.0, -2.0));
        let s = eig_full(&op).unwrap();
        assert_eq!(&s.eigenvalues[..2], &[-100.0, -100.0]);
        assert_eq!(s.eigenvectors[0][0], 1.0);
        assert_eq!(s.eigenvectors[1][20], 1.0);

        let low = eig_lowest(&op, 2).unwrap();
        assert!((low.eigenvalues[0] + 100.0).abs() < 1e-12);
        assert!((low.eigenvalues[1] + 100.0).abs() < 1e-12);
        assert!((low.eigenvectors[0][0] - 1.0).abs() < 1e-12);
        assert!((low.eigenvectors[1][20] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cluster_at_cut_is_kept_whole() {
        // k = 1 must still see both members of the degenerate ground pair
        let op = build_hamiltonian(&params(20, 0.0, 0.0, -2.0));
        let one = eig_lowest(&op, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert!((one.eigenvectors[0][0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_level_analytic() {
        let op = build_hamiltonian(&params(2, 0.0, 1.0, -2.0));
        let expected = [(-1.0 - 5f64.sqrt()) / 2.0, -1.0, (-1.0 + 5f64.sqrt()) / 2.0];
        for spectrum in [eig_full(&op).unwrap(), eig_lowest(&op, 3).unwrap()] {
            for (a, b) in spectrum.eigenvalues.iter().zip(expected) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
        assert!((expected[0] + 1.618034).abs() < 1e-6 && (expected[2] - 0.618034).abs() < 1e-6);
    }

    #[test]
    fn k_bounds() {
        let op = build_hamiltonian(&params(3, 0.1, 1.0, -1.0));
        assert_eq!(eig_lowest(&op, 0), Err(Error::LevelCount { k: 0, dim: 4 }));
        assert_eq!(eig_lowest(&op, 5), Err(Error::LevelCount { k: 5, dim: 4 }));
        let all = eig_lowest(&op, 4).unwrap();
        let full = eig_full(&op).unwrap();
        for k in 0..4 {
            assert!((all.eigenvalues[k] - full.eigenvalues[k]).abs() < 1e-12);
            for (a, b) in all.eigenvectors[k].iter().zip(&full.eigenvectors[k]) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn one_by_one_and_zero_operator() {
        let op = TridiagonalOperator::new(alloc::vec![2.5], alloc::vec![]).unwrap();
        let s = eig_full(&op).unwrap();
        assert_eq!((s.eigenvalues[0], s.eigenvectors[0][0]), (2.5, 1.0));
        let s = eig_lowest(&op, 1).unwrap();
        assert!((s.eigenvalues[0] - 2.5).abs() < 1e-14);

        let zero = TridiagonalOperator::zero(4);
        let s = eig_full(&zero).unwrap();
        assert!(s.eigenvalues.iter().all(|&x| x == 0.0));
        for (k, v) in s.eigenvectors.iter().enumerate() {
            assert_eq!(v[k], 1.0);
        }
    }

    #[test]
    fn ground_states() {
        let b = SpinBasis::new(20).unwrap();
        let g = ground_state(&params(20, 0.5, 0.0, -2.0)).unwrap();
        let low = basis_state(b, b.lowest()).unwrap();
        assert!((fidelity(&g, &low).unwrap() - 1.0).abs() < 1e-14);

        let b2 = SpinBasis::new(2).unwrap();
        let g = ground_state(&params(2, 0.0, 3.0, 0.0)).unwrap();
        let c = coherent_state(b2, PI / 2.0, 0.0);
        for (a, e) in g.amplitudes().iter().zip(c.amplitudes()) {
            assert!((a - e).norm() < 1e-14);
        }
    }

    #[test]
    fn gap_scan_degeneracy_and_errors() {
        let base = params(20, 0.0, 0.0, -2.0);
        let rows = gap_scan(&base, &[0.0, 40.0], 6).unwrap();
        assert_eq!(rows[0].gap01, 0.0);
        assert_eq!(rows[0].eigenvalues.len(), 6);
        assert!(rows[1].gap01 > 1.0);
        assert_eq!(
            gap_scan(&base, &[], 2),
            Err(Error::InvalidGrid("coupling grid is empty"))
        );
        assert!(gap_scan(&base, &[1.0], 22).is_err());
    }
}
