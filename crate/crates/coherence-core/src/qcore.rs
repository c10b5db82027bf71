//! Complex linear algebra and quantum-state primitives.
//!
//! [`ComplexMatrix`] is the universal carrier for operators and states;
//! [`DensityMatrix`] validates the Hermitian / positive-semidefinite /
//! unit-trace invariants once at construction, so every operation downstream
//! may assume them. All values are immutable after construction and safe to
//! share across threads.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::{linalg, real_from, RealScalar};

/// Hermiticity / trace / normalization tolerance used by validating
/// constructors.
pub fn construction_tol<T: RealScalar>() -> T {
    real_from(1e-9)
}

/// Default threshold for treating the largest eigenvalue as 1 in purity
/// tests: `lambda_max >= 1 - tol`.
pub fn default_purity_tol<T: RealScalar>() -> T {
    real_from(1e-9)
}

/// Default relative amplitude cutoff for the coherence rank. The cutoff is
/// relative (`tol * max modulus`) so rescaling a raw Kraus image never
/// changes the rank.
pub fn default_rank_tol<T: RealScalar>() -> T {
    real_from(1e-9)
}

/// Dense rectangular complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T: RealScalar> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: RealScalar> ComplexMatrix<T> {
    /// Build from row-major data; rejects dimension mismatches and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::BadDataLength {
                rows,
                cols,
                got: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from nested rows.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::BadDataLength {
                rows: r,
                cols: c,
                got: rows.iter().map(|row| row.len()).sum(),
            });
        }
        Self::new(r, c, rows.iter().flatten().cloned().collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, z: Complex<T>) {
        self.data[i * self.cols + j] = z;
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    /// Conjugate transpose; dimensions swap.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += aik * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a + b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a - b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, z: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * z).collect(),
        }
    }

    pub fn trace(&self) -> Complex<T> {
        assert!(self.is_square(), "trace of non-square matrix");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    /// Spectral norm (largest singular value).
    pub fn operator_norm(&self) -> T {
        linalg::operator_norm(self.rows, self.cols, &self.data)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.get(i, j) * v[j])
                    .sum::<Complex<T>>()
            })
            .collect()
    }

    /// Max entrywise deviation from Hermitian symmetry.
    pub fn hermiticity_defect(&self) -> T {
        assert!(self.is_square());
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// Pure-state amplitude vector in the reference basis.
///
/// Carries a flag telling whether it was constructed in normalized form or
/// as a raw (e.g. Kraus-image) vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: RealScalar> {
    amplitudes: Vec<Complex<T>>,
    normalized: bool,
}

impl<T: RealScalar> StateVector<T> {
    /// Normalized constructor: the Euclidean norm must be within 1e-9 of 1.
    pub fn new(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let v = Self::unnormalized(amplitudes)?;
        let norm = v.norm();
        if (norm - T::one()).abs() > construction_tol() {
            return Err(Error::NotNormalized {
                norm: norm.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            normalized: true,
            ..v
        })
    }

    /// Raw constructor for unnormalized vectors (Kraus images and the like);
    /// only finiteness is checked.
    pub fn unnormalized(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::BadDataLength {
                rows: 0,
                cols: 1,
                got: 0,
            });
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            amplitudes,
            normalized: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm(&self) -> T {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<T>()
            .sqrt()
    }

    /// Rescale to unit norm.
    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n <= real_from(1e-300) {
            return Err(Error::NullState);
        }
        let inv = T::one() / n;
        Ok(Self {
            amplitudes: self
                .amplitudes
                .iter()
                .map(|z| Complex::new(z.re * inv, z.im * inv))
                .collect(),
            normalized: true,
        })
    }

    pub fn inner(&self, other: &Self) -> Complex<T> {
        assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * *b)
            .sum()
    }

    /// Outer product |v><v|.
    pub fn outer(&self) -> ComplexMatrix<T> {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m.set(i, j, self.amplitudes[i] * self.amplitudes[j].conj());
            }
        }
        m
    }

    /// Fix the global phase so the first amplitude above the relative cutoff
    /// is real and positive.
    pub fn canonical_phase(&self) -> Self {
        let max = self
            .amplitudes
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), |a, b| if b > a { b } else { a });
        if max == T::zero() {
            return self.clone();
        }
        let cutoff = max * default_rank_tol::<T>();
        let pivot = self
            .amplitudes
            .iter()
            .find(|z| z.norm() > cutoff)
            .cloned()
            .unwrap_or_else(Complex::one);
        let phase = pivot / pivot.norm();
        let inv = phase.conj();
        Self {
            amplitudes: self.amplitudes.iter().map(|z| z * inv).collect(),
            normalized: self.normalized,
        }
    }

    /// Coherence rank: (number of amplitudes with modulus above
    /// `tol * max modulus`) - 1.
    ///
    /// Invariant under global phase, amplitude permutation, and rescaling.
    /// A zero vector is rejected.
    pub fn coherence_rank(&self, tol: T) -> Result<usize> {
        let max = self
            .amplitudes
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), |a, b| if b > a { b } else { a });
        if max == T::zero() {
            return Err(Error::NullState);
        }
        let cutoff = max * tol;
        let count = self
            .amplitudes
            .iter()
            .filter(|z| z.norm() > cutoff)
            .count();
        Ok(count - 1)
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
///
/// All three invariants are checked at construction (within 1e-9); the
/// operations assume them afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: RealScalar> {
    matrix: ComplexMatrix<T>,
}

impl<T: RealScalar> DensityMatrix<T> {
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let tol = construction_tol::<T>();
        let defect = matrix.hermiticity_defect();
        if defect > tol {
            return Err(Error::NotHermitian {
                deviation: defect.to_f64().unwrap_or(f64::NAN),
            });
        }
        let trace = matrix.trace();
        if (trace.re - T::one()).abs() > tol || trace.im.abs() > tol {
            return Err(Error::InvalidTrace {
                trace: trace.re.to_f64().unwrap_or(f64::NAN),
            });
        }
        let (values, _) = linalg::hermitian_eigen(matrix.rows(), matrix.data());
        if let Some(min) = values.last() {
            if *min < -tol {
                return Err(Error::NotPositiveSemidefinite {
                    min_eigenvalue: min.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(Self { matrix })
    }

    /// rho = |v><v| for a normalized vector.
    pub fn from_pure(v: &StateVector<T>) -> Result<Self> {
        Self::new(v.normalize()?.outer())
    }

    /// Convex mixture of pure states; weights must sum to 1 within 1e-9.
    pub fn from_mixture(parts: &[(T, StateVector<T>)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument("empty mixture".into()));
        }
        let d = parts[0].1.dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for (w, v) in parts {
            let u = v.normalize()?;
            acc = acc.add(&u.outer().scale(Complex::new(*w, T::zero())));
        }
        Self::new(acc)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    /// Tr(rho^2); lies in [1/dim, 1] for a valid state.
    pub fn purity(&self) -> T {
        self.matrix.mul(&self.matrix).trace().re
    }

    /// If the largest eigenvalue is at least `1 - tol`, the state is treated
    /// as pure and the corresponding unit eigenvector is returned with its
    /// global phase fixed (first significant amplitude real positive).
    pub fn is_pure(&self, tol: T) -> Option<StateVector<T>> {
        pure_component(self.dim(), self.matrix.data(), tol)
    }

    /// Diagonal part in the reference basis; idempotent.
    pub fn dephase(&self) -> DensityMatrix<T> {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            m.set(i, i, Complex::new(self.matrix.get(i, i).re, T::zero()));
        }
        DensityMatrix::new(m).expect("diagonal part of a valid state is valid")
    }

    /// Eigenvalues (descending) with matching orthonormal eigenvectors.
    pub fn eigendecomposition(&self) -> (Vec<T>, Vec<StateVector<T>>) {
        let (values, vectors) = linalg::hermitian_eigen(self.dim(), self.matrix.data());
        let states = vectors
            .into_iter()
            .map(|amps| StateVector {
                amplitudes: amps,
                normalized: true,
            })
            .collect();
        (values, states)
    }

    /// Eigenpairs with eigenvalue above `cutoff`: the canonical ensemble for
    /// the support of rho.
    pub fn support(&self, cutoff: T) -> Vec<(T, StateVector<T>)> {
        let (values, states) = self.eigendecomposition();
        values
            .into_iter()
            .zip(states)
            .filter(|(v, _)| *v > cutoff)
            .collect()
    }
}

/// Purity test on a raw trace-one Hermitian block. Shared by
/// [`DensityMatrix::is_pure`] and the subspace compression path (which must
/// avoid re-validating tiny normalized blocks).
pub(crate) fn pure_component<T: RealScalar>(
    n: usize,
    data: &[Complex<T>],
    tol: T,
) -> Option<StateVector<T>> {
    let (values, vectors) = linalg::hermitian_eigen(n, data);
    if values[0] >= T::one() - tol {
        let v = StateVector {
            amplitudes: vectors.into_iter().next().unwrap(),
            normalized: true,
        };
        Some(v.canonical_phase())
    } else {
        None
    }
}
