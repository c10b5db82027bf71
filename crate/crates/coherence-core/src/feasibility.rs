//! Stochastic and deterministic reachability of pure states under
//! incoherent Kraus operators.
//!
//! Stochastic reachability is decided exactly: because pure states are
//! extreme points of the state set, a multi-branch post-selection reaching a
//! pure target forces every firing branch to reach it alone, so it suffices
//! to scan single incoherent Kraus operators. Their nonzero structure is a
//! [`ColumnAssignment`] (at most one nonzero per column), and for a fixed
//! pattern the condition "K maps the support of rho into the ray of phi" is
//! a homogeneous linear system solved by a rank-revealing null-space
//! computation.
//!
//! Deterministic (trace-preserving) reachability has no such reduction and
//! gets a best-effort optimizer: branches are parameterized inside the
//! per-pattern solution subspaces and the completion residual
//! `||sum K^dag K - I||_F` is minimized by Levenberg-Marquardt from random
//! restarts. Success is certified (residual at machine scale); failure is an
//! honest residual report, not a proof.

use num_complex::Complex;
use num_traits::Zero;

use crate::channels::{validate_channel, ChannelKind, ChannelSpec, KrausOperator};
use crate::error::{Error, Result};
use crate::qcore::{ComplexMatrix, DensityMatrix, StateVector};
use crate::{linalg, real_from, seeding, RealScalar};

/// Hard cap on the dimension for pattern enumeration: (dim+1)^dim patterns.
pub const MAX_PATTERN_DIM: usize = 6;

/// Eigenvalue cutoff defining the support of rho.
pub fn support_cutoff<T: RealScalar>() -> T {
    real_from(1e-10)
}

/// Default relative singular-value cutoff for the null-space solves.
pub fn default_nullspace_tol<T: RealScalar>() -> T {
    real_from(1e-10)
}

/// Residual threshold certifying a trace-preserving completion.
pub fn completion_success_threshold<T: RealScalar>() -> T {
    real_from(1e-9)
}

/// Nonzero structure of an incoherent Kraus operator: column `j` either is
/// zero (`None`) or carries its single nonzero entry in row
/// `target_row[j]` (0-based internally; reports use 1-based labels).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnAssignment {
    dim: usize,
    target_row: Vec<Option<usize>>,
}

impl ColumnAssignment {
    pub fn new(dim: usize, target_row: Vec<Option<usize>>) -> Result<Self> {
        if target_row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: target_row.len(),
            });
        }
        if target_row.iter().flatten().any(|&r| r >= dim) {
            return Err(Error::InvalidArgument("target row out of range".into()));
        }
        Ok(Self { dim, target_row })
    }

    /// Convenience constructor from 1-based labels (0 meaning "zero column").
    pub fn from_one_based(dim: usize, labels: &[usize]) -> Result<Self> {
        let rows = labels
            .iter()
            .map(|&l| if l == 0 { None } else { Some(l - 1) })
            .collect();
        Self::new(dim, rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// 0-based target rows.
    pub fn target_rows(&self) -> &[Option<usize>] {
        &self.target_row
    }

    /// 1-based labels with `None` for zero columns, for reports.
    pub fn one_based(&self) -> Vec<Option<usize>> {
        self.target_row.iter().map(|r| r.map(|x| x + 1)).collect()
    }

    /// Assigned (row, col) positions in column order.
    pub fn positions(&self) -> Vec<(usize, usize)> {
        self.target_row
            .iter()
            .enumerate()
            .filter_map(|(j, r)| r.map(|row| (row, j)))
            .collect()
    }

    /// Apply a basis permutation: column `j` of the permuted pattern is
    /// column `perm^-1(j)` of the original with its row relabeled.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let mut rows = vec![None; self.dim];
        for (j, r) in self.target_row.iter().enumerate() {
            rows[perm[j]] = r.map(|row| perm[row]);
        }
        Self {
            dim: self.dim,
            target_row: rows,
        }
    }
}

/// All `(dim+1)^dim - 1` column assignments (the all-zero pattern is
/// excluded), in mixed-radix order with column 0 as the most significant
/// digit and "zero column" ordered before row labels.
pub fn enumerate_column_assignments(dim: usize) -> Result<Vec<ColumnAssignment>> {
    if !(2..=MAX_PATTERN_DIM).contains(&dim) {
        return Err(Error::DimensionTooLarge {
            dim,
            max: MAX_PATTERN_DIM,
        });
    }
    let base = dim + 1;
    let total = base.pow(dim as u32);
    let mut out = Vec::with_capacity(total - 1);
    for v in 1..total {
        let mut digits = vec![None; dim];
        let mut rest = v;
        for j in (0..dim).rev() {
            let digit = rest % base;
            rest /= base;
            digits[j] = if digit == 0 { None } else { Some(digit - 1) };
        }
        out.push(ColumnAssignment {
            dim,
            target_row: digits,
        });
    }
    Ok(out)
}

/// A feasible single-branch solution: an incoherent Kraus operator of unit
/// operator norm mapping the whole support of rho onto the ray of the
/// target, with its per-eigenvector ray constants and success probability.
#[derive(Debug, Clone)]
pub struct RayMappingSolution<T: RealScalar> {
    pub pattern: ColumnAssignment,
    pub kraus: KrausOperator<T>,
    pub ray_constants: Vec<Complex<T>>,
    pub success_probability: T,
}

/// Outcome of the deterministic completion search.
///
/// `channel` is present exactly when `residual` is at most the success
/// threshold; it is then trace preserving and every branch maps the support
/// of rho into the ray of the target.
#[derive(Debug, Clone)]
pub struct CompletionResult<T: RealScalar> {
    pub residual: T,
    pub channel: Option<ChannelSpec<T>>,
    pub restarts_used: usize,
}

/// Options for [`deterministic_completion_search`].
#[derive(Debug, Clone)]
pub struct CompletionOptions {
    pub restarts: usize,
    /// Branch budget; defaults to `2 * dim`.
    pub max_branches: Option<usize>,
    pub seed: u64,
}

impl Default for CompletionOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_branches: None,
            seed: 0,
        }
    }
}

/// The linear space of pattern-structured Kraus operators mapping every
/// support eigenvector of rho into the ray of phi (ray constants zero
/// included, i.e. annihilators of the support).
struct RaySubspace<T: RealScalar> {
    pattern: ColumnAssignment,
    /// Orthonormal (Frobenius) basis of the K-space.
    basis: Vec<ComplexMatrix<T>>,
    /// Best probability over the unit operator-norm ball, with its argmax.
    max_probability: T,
    best_coeff: Vec<Complex<T>>,
}

impl<T: RealScalar> RaySubspace<T> {
    fn kraus_from(&self, coeff: &[Complex<T>]) -> ComplexMatrix<T> {
        let d = self.pattern.dim();
        let mut k = ComplexMatrix::zeros(d, d);
        for (b, c) in self.basis.iter().zip(coeff.iter()) {
            k = k.add(&b.scale(*c));
        }
        k
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Build the solution subspace for one pattern, or `None` when the only
/// pattern-structured operator compatible with the ray condition is zero.
fn ray_subspace<T: RealScalar>(
    support: &[(T, StateVector<T>)],
    rho: &DensityMatrix<T>,
    phi: &StateVector<T>,
    pattern: &ColumnAssignment,
    nullspace_tol: T,
) -> Option<RaySubspace<T>> {
    let d = pattern.dim();
    let s = support.len();
    let positions = pattern.positions();
    let m = positions.len();
    let unknowns = m + s;

    // Constraint rows: for every support eigenvector v_i and basis row r,
    //   sum_{j -> r} k_j v_i[j] - c_i phi_r = 0.
    let mut a = vec![Complex::<T>::zero(); d * s * unknowns];
    for (i, (_, v)) in support.iter().enumerate() {
        for r in 0..d {
            let row = (i * d + r) * unknowns;
            for (t, (kr, kc)) in positions.iter().enumerate() {
                if *kr == r {
                    a[row + t] = v.amplitudes()[*kc];
                }
            }
            a[row + m + i] = -phi.amplitudes()[r];
        }
    }

    let null = linalg::null_space(d * s, unknowns, &a, nullspace_tol);
    if null.is_empty() {
        return None;
    }
    // Keep only the K-part of each null vector; the ray constants are linear
    // functions of K (c_i = <phi, K v_i>), so the projection is injective.
    let k_parts: Vec<Vec<Complex<T>>> = null.into_iter().map(|v| v[..m].to_vec()).collect();
    let k_basis = linalg::orthonormalize(k_parts, real_from(1e-9));
    if k_basis.is_empty() {
        return None;
    }

    let basis: Vec<ComplexMatrix<T>> = k_basis
        .iter()
        .map(|entries| {
            let mut mmat = ComplexMatrix::zeros(d, d);
            for (t, (r, c)) in positions.iter().enumerate() {
                mmat.set(*r, *c, entries[t]);
            }
            mmat
        })
        .collect();

    let n = basis.len();
    let mut quad = vec![Complex::<T>::zero(); n * n];
    for l in 0..n {
        for j in 0..n {
            // H[l][j] = Tr(B_j rho B_l^dag)
            let t = basis[j]
                .mul(rho.matrix())
                .mul(&basis[l].dagger())
                .trace();
            quad[l * n + j] = t;
        }
    }

    let mut groups = Vec::new();
    let mut rows_present: Vec<usize> = positions.iter().map(|(r, _)| *r).collect();
    rows_present.sort_unstable();
    rows_present.dedup();
    for r in rows_present {
        let mut rows = Vec::new();
        for (t, (kr, _)) in positions.iter().enumerate() {
            if *kr == r {
                let row: Vec<Complex<T>> = k_basis.iter().map(|bvec| bvec[t]).collect();
                rows.push(row);
            }
        }
        groups.push(rows);
    }

    let (best_coeff, max_probability) = maximize_probability(&quad, &groups, n);
    Some(RaySubspace {
        pattern: pattern.clone(),
        basis,
        max_probability,
        best_coeff,
    })
}

/// Maximize `c^dag H c` over the unit operator-norm ball (whose square is
/// the max of the row-group quadratic forms), by projected backtracking
/// ascent from the eigenvectors of `H`.
///
/// Exact for one-dimensional subspaces; a local (in practice global for the
/// small spaces arising here) maximizer otherwise.
fn maximize_probability<T: RealScalar>(
    quad: &[Complex<T>],
    groups: &[Vec<Vec<Complex<T>>>],
    n: usize,
) -> (Vec<Complex<T>>, T) {
    let h_apply = |c: &[Complex<T>]| -> Vec<Complex<T>> {
        (0..n)
            .map(|l| (0..n).map(|j| quad[l * n + j] * c[j]).sum())
            .collect()
    };
    let f = |c: &[Complex<T>]| -> T {
        h_apply(c)
            .iter()
            .zip(c.iter())
            .map(|(hc, ci)| (ci.conj() * hc).re)
            .sum()
    };
    let group_norms = |c: &[Complex<T>]| -> Vec<T> {
        groups
            .iter()
            .map(|rows| {
                rows.iter()
                    .map(|row| {
                        row.iter()
                            .zip(c.iter())
                            .map(|(e, ci)| e * ci)
                            .sum::<Complex<T>>()
                            .norm_sqr()
                    })
                    .sum()
            })
            .collect()
    };
    let opnorm_sq = |c: &[Complex<T>]| -> T {
        group_norms(c)
            .into_iter()
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    };
    let to_boundary = |c: &[Complex<T>]| -> Option<Vec<Complex<T>>> {
        let g = opnorm_sq(c);
        if g <= T::zero() {
            return None;
        }
        let inv = T::one() / g.sqrt();
        Some(c.iter().map(|z| z * Complex::new(inv, T::zero())).collect())
    };

    let (eigvals, eigvecs) = linalg::hermitian_eigen(n, quad);
    let floor: T = real_from(1e-12);
    let mut best: Option<(Vec<Complex<T>>, T)> = None;

    for (lambda, vec) in eigvals.iter().zip(eigvecs.iter()) {
        if *lambda <= floor {
            continue;
        }
        let Some(mut c) = to_boundary(vec) else {
            continue;
        };
        let mut fc = f(&c);
        let mut eta: T = real_from(0.5);
        for _ in 0..300 {
            let hc = h_apply(&c);
            // Steepest ascent of f / opnorm^2 restricted to the boundary.
            let norms = group_norms(&c);
            let active = norms
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            let gc: Vec<Complex<T>> = (0..n)
                .map(|l| {
                    groups[active]
                        .iter()
                        .map(|row| {
                            let dot: Complex<T> =
                                row.iter().zip(c.iter()).map(|(e, ci)| e * ci).sum();
                            row[l].conj() * dot
                        })
                        .sum()
                })
                .collect();
            let grad: Vec<Complex<T>> = hc
                .iter()
                .zip(gc.iter())
                .map(|(h, g)| h - g * Complex::new(fc, T::zero()))
                .collect();
            let gnorm: T = grad.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            if gnorm <= real_from(1e-13) {
                break;
            }
            let mut advanced = false;
            while eta > real_from(1e-11) {
                let trial: Vec<Complex<T>> = c
                    .iter()
                    .zip(grad.iter())
                    .map(|(ci, gi)| ci + gi * Complex::new(eta, T::zero()))
                    .collect();
                if let Some(tb) = to_boundary(&trial) {
                    let ft = f(&tb);
                    if ft > fc {
                        c = tb;
                        fc = ft;
                        advanced = true;
                        eta = (eta + eta).min(T::one());
                        break;
                    }
                }
                eta *= real_from(0.5);
            }
            if !advanced {
                break;
            }
        }
        if best.as_ref().is_none_or(|(_, bf)| fc > *bf) {
            best = Some((c, fc));
        }
    }

    match best {
        Some((c, fc)) => (c, fc),
        None => (vec![Complex::zero(); n], T::zero()),
    }
}

/// Canonical representative: rescale to unit operator norm and fix the
/// global phase so the largest-modulus entry is real positive.
fn canonicalize_kraus<T: RealScalar>(k: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let op = k.operator_norm();
    let mut out = k.scale(Complex::new(T::one() / op, T::zero()));
    let mut pivot = Complex::<T>::zero();
    for i in 0..out.rows() {
        for j in 0..out.cols() {
            if out.get(i, j).norm() > pivot.norm() {
                pivot = out.get(i, j);
            }
        }
    }
    if pivot.norm() > T::zero() {
        let phase = pivot / pivot.norm();
        out = out.scale(phase.conj());
    }
    out
}

/// Solve the ray-mapping feasibility problem for one pattern.
///
/// Builds the homogeneous system `K v_i = c_i phi` over the support
/// eigenbasis of rho, extracts its null space with the relative
/// singular-value cutoff `tol`. When the space contains an operator that
/// does not annihilate the support, the probability-maximizing
/// representative is returned rescaled to unit operator norm.
pub fn solve_ray_mapping<T: RealScalar>(
    rho: &DensityMatrix<T>,
    phi: &StateVector<T>,
    pattern: &ColumnAssignment,
    tol: T,
) -> Option<RayMappingSolution<T>> {
    assert_eq!(pattern.dim(), rho.dim(), "pattern dimension mismatch");
    assert!(
        (phi.norm() - T::one()).abs() <= real_from(1e-9),
        "target state must be normalized"
    );
    let support = rho.support(support_cutoff());
    let sub = ray_subspace(&support, rho, phi, pattern, tol)?;
    finish_solution(&sub, &support, rho, phi)
}

fn finish_solution<T: RealScalar>(
    sub: &RaySubspace<T>,
    support: &[(T, StateVector<T>)],
    rho: &DensityMatrix<T>,
    phi: &StateVector<T>,
) -> Option<RayMappingSolution<T>> {
    if sub.max_probability <= real_from(1e-12) {
        return None;
    }
    let kraus_raw = sub.kraus_from(&sub.best_coeff);
    let kraus = canonicalize_kraus(&kraus_raw);
    let ray_constants: Vec<Complex<T>> = support
        .iter()
        .map(|(_, v)| {
            let image = kraus.mul_vec(v.amplitudes());
            phi.amplitudes()
                .iter()
                .zip(image.iter())
                .map(|(p, i)| p.conj() * *i)
                .sum()
        })
        .collect();
    let p = kraus
        .mul(rho.matrix())
        .mul(&kraus.dagger())
        .trace()
        .re;
    if p <= real_from(1e-12) {
        return None;
    }
    Some(RayMappingSolution {
        pattern: sub.pattern.clone(),
        kraus: KrausOperator::new(kraus).expect("square"),
        ray_constants,
        success_probability: p,
    })
}

/// Exact single-Kraus stochastic reachability: scans every column
/// assignment and returns the feasible solution with the largest success
/// probability (ties resolved by enumeration order). `Ok(None)` certifies
/// that no stochastic incoherent operation reaches the target.
pub fn stochastic_io_reachable<T: RealScalar>(
    rho: &DensityMatrix<T>,
    phi: &StateVector<T>,
    tol: T,
) -> Result<Option<RayMappingSolution<T>>> {
    let patterns = enumerate_column_assignments(rho.dim())?;
    let support = rho.support(support_cutoff());
    let mut best: Option<RayMappingSolution<T>> = None;
    for pattern in &patterns {
        let Some(sub) = ray_subspace(&support, rho, phi, pattern, tol) else {
            continue;
        };
        let Some(sol) = finish_solution(&sub, &support, rho, phi) else {
            continue;
        };
        let better = best
            .as_ref()
            .is_none_or(|b| sol.success_probability > b.success_probability);
        if better {
            best = Some(sol);
        }
    }
    Ok(best)
}

/// Decomposition-independence check: remixes the eigen-ensemble of rho by
/// random unitaries and verifies that the Kraus image of every remixed
/// member stays on the ray of phi (best ray constant, Euclidean residual at
/// most 1e-9). Deterministic per seed.
pub fn ray_invariance_check<T: RealScalar>(
    k: &KrausOperator<T>,
    rho: &DensityMatrix<T>,
    phi: &StateVector<T>,
    remixings: usize,
    seed: u64,
) -> bool {
    assert!(remixings >= 1);
    let support = rho.support(support_cutoff());
    let s = support.len();
    let d = rho.dim();
    let bound: T = real_from(1e-9);
    let mut rng = seeding::rng_from(seed);
    for _ in 0..remixings {
        let u = seeding::random_unitary::<T>(s, &mut rng);
        for row in u.iter().take(s) {
            // sqrt(p_i) |psi_i> = sum_j U[i][j] sqrt(lambda_j) |lambda_j>
            let mut member = vec![Complex::<T>::zero(); d];
            for (j, (lambda, vj)) in support.iter().enumerate() {
                let w = row[j] * Complex::new(lambda.sqrt(), T::zero());
                for (slot, amp) in member.iter_mut().zip(vj.amplitudes()) {
                    *slot += w * amp;
                }
            }
            let norm: T = member.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            if norm <= real_from(1e-12) {
                continue;
            }
            let inv = Complex::new(T::one() / norm, T::zero());
            let psi: Vec<Complex<T>> = member.iter().map(|z| z * inv).collect();
            let image = k.matrix().mul_vec(&psi);
            let c: Complex<T> = phi
                .amplitudes()
                .iter()
                .zip(image.iter())
                .map(|(p, i)| p.conj() * *i)
                .sum();
            let residual: T = image
                .iter()
                .zip(phi.amplitudes().iter())
                .map(|(i, p)| (i - p * c).norm_sqr())
                .sum::<T>()
                .sqrt();
            if residual > bound {
                return false;
            }
        }
    }
    true
}

/// Construct the 4-dimensional instance whose maximal pure coherent-state
/// subspace grows from 1 to 2 under a deterministic incoherent operation.
///
/// The channel is the two-branch block rotation
/// `K1 = [[a, b, 0, 0], [0, 0, c, d], 0, 0]`,
/// `K2 = [[-conj(b), conj(a), 0, 0], [0, 0, -conj(d), conj(c)], 0, 0]`
/// (trace preserving whenever `|a|^2 + |b|^2 = |c|^2 + |d|^2 = 1`), and the
/// state is the `p1 : 1 - p1` mixture of the branch-kernel solutions
/// `phi1 = (conj a, conj b, conj c, conj d)/sqrt2`,
/// `phi2 = (-b, a, -d, c)/sqrt2`, so that `K1 phi1 = phi`, `K1 phi2 = 0`,
/// `K2 phi1 = 0`, `K2 phi2 = phi` with `phi = (1, 1, 0, 0)/sqrt2`.
pub fn build_theorem4_instance<T: RealScalar>(
    a: Complex<T>,
    b: Complex<T>,
    c: Complex<T>,
    d: Complex<T>,
    p1: T,
) -> Result<(DensityMatrix<T>, ChannelSpec<T>, StateVector<T>)> {
    let tol: T = real_from(1e-9);
    let tiny: T = real_from(1e-12);
    if [a, b, c, d].iter().any(|z| z.norm() < tiny) {
        return Err(Error::DegenerateRotation);
    }
    if (a.norm_sqr() + b.norm_sqr() - T::one()).abs() > tol
        || (c.norm_sqr() + d.norm_sqr() - T::one()).abs() > tol
    {
        return Err(Error::NotNormalized {
            norm: (a.norm_sqr() + b.norm_sqr()).to_f64().unwrap_or(f64::NAN),
        });
    }
    if p1 <= T::zero() || p1 >= T::one() {
        return Err(Error::InvalidArgument(
            "mixture weight must lie strictly between 0 and 1".into(),
        ));
    }

    let zero = Complex::<T>::zero();
    let k1 = ComplexMatrix::from_rows(&[
        vec![a, b, zero, zero],
        vec![zero, zero, c, d],
        vec![zero; 4],
        vec![zero; 4],
    ])?;
    let k2 = ComplexMatrix::from_rows(&[
        vec![-b.conj(), a.conj(), zero, zero],
        vec![zero, zero, -d.conj(), c.conj()],
        vec![zero; 4],
        vec![zero; 4],
    ])?;

    let sqrt_half: T = real_from(0.5f64.sqrt());
    let scale = Complex::new(sqrt_half, T::zero());
    let phi1 = StateVector::new(vec![
        a.conj() * scale,
        b.conj() * scale,
        c.conj() * scale,
        d.conj() * scale,
    ])?;
    let phi2 = StateVector::new(vec![-b * scale, a * scale, -d * scale, c * scale])?;
    let phi = StateVector::new(vec![scale, scale, zero, zero])?;

    let rho = DensityMatrix::from_mixture(&[(p1, phi1), (T::one() - p1, phi2)])?;
    let channel = validate_channel(vec![KrausOperator::new(k1)?, KrausOperator::new(k2)?])?;
    debug_assert_eq!(channel.kind(), ChannelKind::TracePreserving);

    let out = crate::channels::apply_channel(&channel, &rho)?;
    let target = DensityMatrix::from_pure(&phi)?;
    debug_assert!(out.matrix().max_abs_diff(target.matrix()) <= real_from(1e-12));
    let _ = out;

    Ok((rho, channel, phi))
}

/// Search for a trace-preserving incoherent channel transforming rho exactly
/// into the pure target.
///
/// Branch candidates live in the per-pattern ray-mapping solution subspaces
/// (which include support annihilators, branches firing with probability 0
/// on rho); up to `max_branches` branches are parameterized inside these
/// subspaces and the completion residual `||sum K^dag K - I||_F` is driven
/// down by Levenberg-Marquardt from seeded random restarts. Deterministic
/// per seed.
pub fn deterministic_completion_search<T: RealScalar>(
    rho: &DensityMatrix<T>,
    phi: &StateVector<T>,
    opts: &CompletionOptions,
) -> Result<CompletionResult<T>> {
    let d = rho.dim();
    let patterns = enumerate_column_assignments(d)?;
    let support = rho.support(support_cutoff());
    let nullspace_tol = default_nullspace_tol::<T>();

    let pool: Vec<RaySubspace<T>> = patterns
        .iter()
        .filter_map(|p| ray_subspace(&support, rho, phi, p, nullspace_tol))
        .collect();
    // Capable subspaces (able to emit the target with positive probability)
    // ranked by dimension, then probability: zero-residual channels
    // concentrate their branches on few of these, typically one, so the
    // first restarts try them one at a time.
    let capable: Vec<usize> = {
        let mut idx: Vec<usize> = (0..pool.len())
            .filter(|&i| pool[i].max_probability > real_from(1e-12))
            .collect();
        idx.sort_by(|&x, &y| {
            pool[y].basis.len().cmp(&pool[x].basis.len()).then(
                pool[y]
                    .max_probability
                    .partial_cmp(&pool[x].max_probability)
                    .unwrap(),
            )
        });
        idx
    };

    // Without a single ray-mapping branch no channel can emit the target at
    // all: report the trivial residual ||I||_F.
    if capable.is_empty() {
        return Ok(CompletionResult {
            residual: T::from_usize(d).unwrap().sqrt(),
            channel: None,
            restarts_used: 0,
        });
    }

    let max_branches = opts.max_branches.unwrap_or(2 * d).max(1);
    let threshold = completion_success_threshold::<T>();
    let mut best_residual = T::infinity();
    let restarts = opts.restarts.max(1);
    let concentrated = capable.len().min(restarts / 2);

    for restart in 0..restarts {
        let mut rng = seeding::rng_from(seeding::derive_seed(opts.seed, restart as u64));
        let assignment: Vec<usize> = if restart < concentrated {
            vec![capable[restart]; max_branches]
        } else {
            use rand::Rng;
            // Random concentrated subsets: a few subspaces, branches spread
            // round-robin; annihilator-only subspaces may join the mix.
            let n_sub = rng.gen_range(1..=3usize);
            let head = capable.len().min(10);
            let picks: Vec<usize> = (0..n_sub)
                .map(|_| {
                    if rng.gen_bool(0.7) {
                        capable[rng.gen_range(0..head)]
                    } else {
                        rng.gen_range(0..pool.len())
                    }
                })
                .collect();
            (0..max_branches).map(|b| picks[b % picks.len()]).collect()
        };

        let branches: Vec<&RaySubspace<T>> = assignment.iter().map(|&i| &pool[i]).collect();
        let param_len: usize = branches.iter().map(|s| 2 * s.dim()).sum();
        let spread = (T::from_usize(d).unwrap()
            / T::from_usize(max_branches.max(1)).unwrap())
        .sqrt();
        let x0: Vec<T> = (0..param_len)
            .map(|_| real_from::<T>(seeding::standard_normal(&mut rng)) * spread)
            .collect();

        let (x, residual) = minimize_completion(&branches, d, x0);
        if residual < best_residual {
            best_residual = residual;
        }
        if residual <= threshold {
            let ops = assemble_branches(&branches, d, &x);
            let channel = validate_channel(ops)?;
            debug_assert_eq!(channel.kind(), ChannelKind::TracePreserving);
            return Ok(CompletionResult {
                residual,
                channel: Some(channel),
                restarts_used: restart + 1,
            });
        }
    }

    Ok(CompletionResult {
        residual: best_residual,
        channel: None,
        restarts_used: opts.restarts.max(1),
    })
}

fn assemble_branches<T: RealScalar>(
    branches: &[&RaySubspace<T>],
    d: usize,
    x: &[T],
) -> Vec<KrausOperator<T>> {
    let mut ops = Vec::new();
    let mut offset = 0;
    for sub in branches {
        let m = sub.dim();
        let coeff: Vec<Complex<T>> = (0..m)
            .map(|t| Complex::new(x[offset + 2 * t], x[offset + 2 * t + 1]))
            .collect();
        offset += 2 * m;
        let k = sub.kraus_from(&coeff);
        if k.frobenius_norm() > real_from(1e-6) {
            ops.push(KrausOperator::new(k).expect("square"));
        }
    }
    if ops.is_empty() {
        ops.push(KrausOperator::new(ComplexMatrix::zeros(d, d)).expect("square"));
    }
    ops
}

/// Levenberg-Marquardt on the completion residuals. Returns the final
/// parameters and the Frobenius residual norm.
fn minimize_completion<T: RealScalar>(
    branches: &[&RaySubspace<T>],
    d: usize,
    mut x: Vec<T>,
) -> (Vec<T>, T) {
    let n_res = 2 * d * d;
    let n_par = x.len();

    let build_ks = |x: &[T]| -> Vec<ComplexMatrix<T>> {
        let mut out = Vec::with_capacity(branches.len());
        let mut offset = 0;
        for sub in branches {
            let m = sub.dim();
            let coeff: Vec<Complex<T>> = (0..m)
                .map(|t| Complex::new(x[offset + 2 * t], x[offset + 2 * t + 1]))
                .collect();
            offset += 2 * m;
            out.push(sub.kraus_from(&coeff));
        }
        out
    };
    let residual = |x: &[T]| -> Vec<T> {
        let ks = build_ks(x);
        let mut e = ComplexMatrix::<T>::identity(d).scale(Complex::new(-T::one(), T::zero()));
        for k in &ks {
            e = e.add(&k.dagger().mul(k));
        }
        let mut r = Vec::with_capacity(n_res);
        for i in 0..d {
            for j in 0..d {
                let z = e.get(i, j);
                r.push(z.re);
                r.push(z.im);
            }
        }
        r
    };

    let jacobian = |x: &[T]| -> Vec<T> {
        // Row-major (n_res x n_par).
        let ks = build_ks(x);
        let mut jac = vec![T::zero(); n_res * n_par];
        let mut offset = 0;
        for (b, sub) in branches.iter().enumerate() {
            let kd = ks[b].dagger();
            for (t, basis) in sub.basis.iter().enumerate() {
                let bd = basis.dagger();
                // d(K^dag K)/d re = B^dag K + K^dag B
                let dre = bd.mul(&ks[b]).add(&kd.mul(basis));
                // d(K^dag K)/d im = i (K^dag B - B^dag K)
                let diff = kd.mul(basis).sub(&bd.mul(&ks[b]));
                let dim_mat = diff.scale(Complex::new(T::zero(), T::one()));
                for i in 0..d {
                    for j in 0..d {
                        let row_re = 2 * (i * d + j);
                        let col_re = offset + 2 * t;
                        jac[row_re * n_par + col_re] = dre.get(i, j).re;
                        jac[(row_re + 1) * n_par + col_re] = dre.get(i, j).im;
                        jac[row_re * n_par + col_re + 1] = dim_mat.get(i, j).re;
                        jac[(row_re + 1) * n_par + col_re + 1] = dim_mat.get(i, j).im;
                    }
                }
            }
            offset += 2 * sub.dim();
        }
        jac
    };

    let cost_of = |r: &[T]| -> T { r.iter().map(|v| *v * *v).sum() };

    let mut r = residual(&x);
    let mut cost = cost_of(&r);
    let mut lambda: T = real_from(1e-3);
    let target: T = real_from(1e-22); // cost scale: residual 1e-11 squared

    for _iter in 0..200 {
        if cost <= target {
            break;
        }
        let jac = jacobian(&x);
        // g = J^T r, A = J^T J
        let mut g = vec![T::zero(); n_par];
        for i in 0..n_res {
            let ri = r[i];
            if ri == T::zero() {
                continue;
            }
            for p in 0..n_par {
                g[p] += jac[i * n_par + p] * ri;
            }
        }
        let gmax = g.iter().fold(T::zero(), |a, v| if v.abs() > a { v.abs() } else { a });
        if gmax <= real_from(1e-14) {
            break;
        }
        let mut a = vec![T::zero(); n_par * n_par];
        for i in 0..n_res {
            for p in 0..n_par {
                let jip = jac[i * n_par + p];
                if jip == T::zero() {
                    continue;
                }
                for q in p..n_par {
                    a[p * n_par + q] += jip * jac[i * n_par + q];
                }
            }
        }
        for p in 0..n_par {
            for q in 0..p {
                a[p * n_par + q] = a[q * n_par + p];
            }
        }

        let mut accepted = false;
        for _attempt in 0..25 {
            let mut m = a.clone();
            for p in 0..n_par {
                let diag = a[p * n_par + p];
                m[p * n_par + p] = diag + lambda * (diag + real_from(1e-12));
            }
            let mut rhs: Vec<T> = g.iter().map(|v| -*v).collect();
            let Some(step) = linalg::solve_real(&mut m, n_par, &mut rhs) else {
                lambda *= real_from(10.0);
                continue;
            };
            let trial: Vec<T> = x.iter().zip(step.iter()).map(|(xi, si)| *xi + *si).collect();
            let tr = residual(&trial);
            let tc = cost_of(&tr);
            if tc < cost {
                x = trial;
                r = tr;
                cost = tc;
                lambda = (lambda * real_from(0.3)).max(real_from(1e-12));
                accepted = true;
                break;
            }
            lambda *= real_from(10.0);
            if lambda > real_from(1e10) {
                break;
            }
        }
        if !accepted {
            break;
        }
    }

    (x, cost.sqrt())
}
