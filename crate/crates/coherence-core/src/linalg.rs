//! Small dense complex linear algebra used by the rest of the crate.
//!
//! Everything here targets matrices of dimension at most ~16, so cyclic
//! Jacobi methods are used throughout: the two-sided method for Hermitian
//! eigendecompositions and the one-sided (Hestenes) method for singular
//! values and null spaces. One-sided Jacobi computes small singular values
//! with high relative accuracy, which the rank-revealing null-space cutoff
//! relies on.
//!
//! Matrices are flat row-major `&[Complex<T>]` slices with explicit
//! dimensions.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::RealScalar;

/// 2x2 complex Jacobi rotation parameters for the Hermitian block
/// `[[a, g], [conj(g), b]]` with `a`, `b` real.
///
/// The returned `(c, s, u)` define the unitary
/// `G = [[c*u, s*u], [-s, 1*c]]` (acting on the pair of columns) such that
/// `G^dag H G` is diagonal; `u` is the phase of `g`.
fn jacobi_rotation<T: RealScalar>(a: T, b: T, g: Complex<T>) -> (T, T, Complex<T>) {
    let m = g.norm();
    let u = if m > T::zero() {
        g / m
    } else {
        Complex::one()
    };
    let two = T::one() + T::one();
    let tau = (b - a) / (two * m);
    let t = if tau >= T::zero() {
        T::one() / (tau + (T::one() + tau * tau).sqrt())
    } else {
        T::one() / (tau - (T::one() + tau * tau).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;
    (c, s, u)
}

/// Eigendecomposition of a Hermitian matrix by cyclic two-sided Jacobi.
///
/// Returns eigenvalues in descending order with matching orthonormal
/// eigenvectors (`vectors[k]` is the k-th eigenvector). The input is only
/// read; slight non-Hermitian noise is tolerated by symmetrizing first.
pub(crate) fn hermitian_eigen<T: RealScalar>(
    n: usize,
    data: &[Complex<T>],
) -> (Vec<T>, Vec<Vec<Complex<T>>>) {
    assert_eq!(data.len(), n * n, "hermitian_eigen: bad data length");
    // Work on the symmetrized copy (A + A^dag)/2.
    let mut a = vec![Complex::<T>::zero(); n * n];
    let half = T::from_f64(0.5).unwrap();
    for i in 0..n {
        for j in 0..n {
            let z = data[i * n + j] + data[j * n + i].conj();
            a[i * n + j] = Complex::new(z.re * half, z.im * half);
        }
    }
    let mut v = vec![Complex::<T>::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = Complex::one();
    }

    let norm: T = a.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    let stop = norm * T::epsilon();

    for _sweep in 0..64 {
        let mut max_off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let m = apq.norm();
                if m > max_off {
                    max_off = m;
                }
                if m <= stop {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let (c, s, u) = jacobi_rotation(app, aqq, apq);
                let cu = u * c;
                let su = u * s;
                // Column update: A <- A G, V <- V G.
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = aip * cu - aiq * s;
                    a[i * n + q] = aip * su + aiq * c;
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = vip * cu - viq * s;
                    v[i * n + q] = vip * su + viq * c;
                }
                // Row update: A <- G^dag A.
                let cu_conj = cu.conj();
                let su_conj = su.conj();
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = apj * cu_conj - aqj * s;
                    a[q * n + j] = apj * su_conj + aqj * c;
                }
            }
        }
        if max_off <= stop {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[i * n + i].re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());
    let values: Vec<T> = order.iter().map(|&i| diag[i]).collect();
    let vectors: Vec<Vec<Complex<T>>> = order
        .iter()
        .map(|&j| (0..n).map(|i| v[i * n + j]).collect())
        .collect();
    (values, vectors)
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Orthogonalizes the columns of `a` in place accumulating the right
/// singular vectors; returns `(sigma, v)` where `sigma[j] = ||W[:,j]||` and
/// `v[j]` is the j-th right singular vector. Neither output is sorted.
fn one_sided_jacobi<T: RealScalar>(
    rows: usize,
    cols: usize,
    a: &[Complex<T>],
) -> (Vec<T>, Vec<Vec<Complex<T>>>) {
    assert_eq!(a.len(), rows * cols, "one_sided_jacobi: bad data length");
    // Column-major working copy for cache-friendly column ops.
    let mut w: Vec<Vec<Complex<T>>> = (0..cols)
        .map(|j| (0..rows).map(|i| a[i * cols + j]).collect())
        .collect();
    let mut v: Vec<Vec<Complex<T>>> = (0..cols)
        .map(|j| {
            let mut e = vec![Complex::<T>::zero(); cols];
            e[j] = Complex::one();
            e
        })
        .collect();

    let eps = T::epsilon() * T::from_f64(8.0).unwrap();
    for _sweep in 0..64 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let app: T = w[p].iter().map(|z| z.norm_sqr()).sum();
                let aqq: T = w[q].iter().map(|z| z.norm_sqr()).sum();
                let apq: Complex<T> = w[p]
                    .iter()
                    .zip(w[q].iter())
                    .map(|(x, y)| x.conj() * *y)
                    .sum();
                if apq.norm() <= eps * (app * aqq).sqrt() || apq.norm() == T::zero() {
                    continue;
                }
                rotated = true;
                let (c, s, u) = jacobi_rotation(app, aqq, apq);
                let cu = u * c;
                let su = u * s;
                for i in 0..rows {
                    let wip = w[p][i];
                    let wiq = w[q][i];
                    w[p][i] = wip * cu - wiq * s;
                    w[q][i] = wip * su + wiq * c;
                }
                for i in 0..cols {
                    let vip = v[p][i];
                    let viq = v[q][i];
                    v[p][i] = vip * cu - viq * s;
                    v[q][i] = vip * su + viq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma: Vec<T> = w
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt())
        .collect();
    (sigma, v)
}

/// Singular values in descending order.
#[cfg(test)]
pub(crate) fn singular_values<T: RealScalar>(rows: usize, cols: usize, a: &[Complex<T>]) -> Vec<T> {
    let (mut sigma, _) = one_sided_jacobi(rows, cols, a);
    sigma.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sigma
}

/// Spectral (operator) norm: the largest singular value.
pub(crate) fn operator_norm<T: RealScalar>(rows: usize, cols: usize, a: &[Complex<T>]) -> T {
    let (sigma, _) = one_sided_jacobi(rows, cols, a);
    sigma
        .into_iter()
        .fold(T::zero(), |acc, s| if s > acc { s } else { acc })
}

/// Orthonormal basis of the null space of `a`, using a relative
/// singular-value cutoff: `sigma <= rel_tol * sigma_max` counts as zero.
/// A zero matrix yields the full standard basis.
pub(crate) fn null_space<T: RealScalar>(
    rows: usize,
    cols: usize,
    a: &[Complex<T>],
    rel_tol: T,
) -> Vec<Vec<Complex<T>>> {
    let (sigma, v) = one_sided_jacobi(rows, cols, a);
    let sigma_max = sigma
        .iter()
        .cloned()
        .fold(T::zero(), |acc, s| if s > acc { s } else { acc });
    let cutoff = sigma_max * rel_tol;
    sigma
        .iter()
        .zip(v)
        .filter(|(s, _)| **s <= cutoff)
        .map(|(_, col)| col)
        .collect()
}

/// Modified Gram-Schmidt over complex vectors; vectors whose residual drops
/// below `drop_tol` times their original norm are discarded.
pub(crate) fn orthonormalize<T: RealScalar>(
    vecs: Vec<Vec<Complex<T>>>,
    drop_tol: T,
) -> Vec<Vec<Complex<T>>> {
    let mut basis: Vec<Vec<Complex<T>>> = Vec::with_capacity(vecs.len());
    for mut v in vecs {
        let original: T = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if original == T::zero() {
            continue;
        }
        for b in &basis {
            let overlap: Complex<T> = b.iter().zip(v.iter()).map(|(x, y)| x.conj() * *y).sum();
            for (vi, bi) in v.iter_mut().zip(b.iter()) {
                *vi -= *bi * overlap;
            }
        }
        let rem: T = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if rem > drop_tol * original {
            let inv = T::one() / rem;
            for vi in v.iter_mut() {
                *vi = Complex::new(vi.re * inv, vi.im * inv);
            }
            basis.push(v);
        }
    }
    basis
}

/// Solve the real linear system `a x = b` in place by Gaussian elimination
/// with partial pivoting; returns `None` when a pivot is (numerically) zero.
pub(crate) fn solve_real<T: RealScalar>(a: &mut [T], n: usize, b: &mut [T]) -> Option<Vec<T>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k * n + k].abs();
        for i in (k + 1)..n {
            let cand = a[i * n + k].abs();
            if cand > best {
                best = cand;
                piv = i;
            }
        }
        if best <= T::epsilon() * T::from_f64(16.0).unwrap() {
            return None;
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            b.swap(k, piv);
        }
        let pivot = a[k * n + k];
        for i in (k + 1)..n {
            let factor = a[i * n + k] / pivot;
            if factor == T::zero() {
                continue;
            }
            for j in k..n {
                let akj = a[k * n + j];
                a[i * n + j] -= factor * akj;
            }
            b[i] -= factor * b[k];
        }
    }
    let mut x = vec![T::zero(); n];
    for k in (0..n).rev() {
        let mut acc = b[k];
        for j in (k + 1)..n {
            acc -= a[k * n + j] * x[j];
        }
        x[k] = acc / a[k * n + k];
    }
    Some(x)
}
