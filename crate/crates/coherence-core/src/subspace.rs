//! Incoherent projectors and pure coherent-state subspaces.
//!
//! An incoherent projector is a sum of reference-basis projectors over an
//! index subset. A state has a pure coherent-state subspace at a projector
//! when the compressed, renormalized block is pure and fully coherent on its
//! support; the subspace dimension is the subset size. The search for the
//! maximal one is exhaustive over all subsets, largest first, which is exact
//! and cheap for the dimensions this crate targets (at most 16).

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::qcore::{pure_component, ComplexMatrix, DensityMatrix, StateVector};
use crate::{real_from, RealScalar};

/// Hard cap on the basis dimension for exhaustive subset enumeration.
pub const MAX_ENUMERATION_DIM: usize = 16;

/// Basis-index subset representing the projector `P = sum_{i in I} |i><i|`.
///
/// Indices are 1-based, matching the reference-basis labels used everywhere
/// in reports and documents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncoherentProjector {
    dim: usize,
    indices: Vec<usize>,
}

impl IncoherentProjector {
    pub fn new(dim: usize, indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidIndexSet {
                reason: "empty index set".into(),
            });
        }
        if !indices.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidIndexSet {
                reason: "indices must be strictly increasing".into(),
            });
        }
        if indices[0] < 1 || *indices.last().unwrap() > dim {
            return Err(Error::InvalidIndexSet {
                reason: format!("indices must lie in 1..={dim}"),
            });
        }
        Ok(Self { dim, indices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// 1-based basis indices, strictly increasing.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    /// Dense matrix form of the projector.
    pub fn matrix<T: RealScalar>(&self) -> ComplexMatrix<T> {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for &i in &self.indices {
            m.set(i - 1, i - 1, Complex::new(T::one(), T::zero()));
        }
        m
    }
}

/// Result of the maximal pure coherent-state subspace search.
#[derive(Debug, Clone)]
pub struct SubspaceReport<T: RealScalar> {
    pub max_dimension: usize,
    pub witness_projector: IncoherentProjector,
    pub witness_state: StateVector<T>,
}

/// All size-`k` subsets of `{1..dim}` in lexicographic order.
fn subsets_of_size(dim: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(dim: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=dim {
            cur.push(i);
            rec(dim, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(dim, k, 1, &mut cur, &mut out);
    out
}

fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_ENUMERATION_DIM {
        return Err(Error::DimensionTooLarge {
            dim,
            max: MAX_ENUMERATION_DIM,
        });
    }
    Ok(())
}

/// All index subsets of size at least `min_size`, ordered by size ascending
/// and lexicographically within each size.
pub fn enumerate_incoherent_projectors(
    dim: usize,
    min_size: usize,
) -> Result<Vec<IncoherentProjector>> {
    check_dim(dim)?;
    if min_size < 1 || min_size > dim {
        return Err(Error::InvalidArgument(format!(
            "min_size must lie in 1..={dim}, got {min_size}"
        )));
    }
    let mut out = Vec::new();
    for k in min_size..=dim {
        for indices in subsets_of_size(dim, k) {
            out.push(IncoherentProjector { dim, indices });
        }
    }
    Ok(out)
}

/// Subsets ordered largest first (size descending, lexicographic within a
/// size), the canonical search order for maximality with the reproducible
/// lexicographically-smallest tie-break.
fn projectors_largest_first(
    dim: usize,
    min_size: usize,
) -> impl Iterator<Item = IncoherentProjector> {
    (min_size..=dim).rev().flat_map(move |k| {
        subsets_of_size(dim, k)
            .into_iter()
            .map(move |indices| IncoherentProjector { dim, indices })
    })
}

/// Compress `rho` onto the projector support and test for a fully coherent
/// pure block.
///
/// Returns the compressed state embedded back into the full basis together
/// with its coherence rank `|indices| - 1`. `None` when the compressed trace
/// vanishes, the block is mixed, or some amplitude on the support falls
/// below the relative cutoff (a dead index would otherwise inflate the
/// subspace dimension).
pub fn pure_subspace_at<T: RealScalar>(
    rho: &DensityMatrix<T>,
    projector: &IncoherentProjector,
    tol: T,
) -> Option<(StateVector<T>, usize)> {
    assert_eq!(projector.dim(), rho.dim(), "projector dimension mismatch");
    let idx: Vec<usize> = projector.indices().iter().map(|i| i - 1).collect();
    let k = idx.len();
    let trace: T = idx
        .iter()
        .map(|&i| rho.matrix().get(i, i).re)
        .fold(T::zero(), |a, b| a + b);
    if trace <= real_from(1e-12) {
        return None;
    }
    let inv = T::one() / trace;
    let mut block = Vec::with_capacity(k * k);
    for &i in &idx {
        for &j in &idx {
            let z = rho.matrix().get(i, j);
            block.push(Complex::new(z.re * inv, z.im * inv));
        }
    }
    let compressed = pure_component(k, &block, tol)?;
    // Fully coherent on the support: every amplitude must clear the relative
    // rank cutoff, so the subspace dimension equals the subset size.
    match compressed.coherence_rank(tol) {
        Ok(rank) if rank + 1 == k => {}
        _ => return None,
    }
    let mut amps = vec![Complex::<T>::zero(); rho.dim()];
    for (slot, &i) in idx.iter().enumerate() {
        amps[i] = compressed.amplitudes()[slot];
    }
    let embedded = StateVector::unnormalized(amps)
        .expect("finite amplitudes")
        .normalize()
        .expect("unit-trace pure block");
    Some((embedded.canonical_phase(), k - 1))
}

/// Exhaustive largest-first search for the maximal pure coherent-state
/// subspace. Always succeeds for a valid state: singletons with nonzero
/// population are pure blocks of dimension 1.
pub fn max_pure_coherent_subspace<T: RealScalar>(
    rho: &DensityMatrix<T>,
    tol: T,
) -> Result<SubspaceReport<T>> {
    check_dim(rho.dim())?;
    for projector in projectors_largest_first(rho.dim(), 1) {
        if let Some((state, _)) = pure_subspace_at(rho, &projector, tol) {
            return Ok(SubspaceReport {
                max_dimension: projector.size(),
                witness_projector: projector,
                witness_state: state,
            });
        }
    }
    unreachable!("a unit-trace state has a populated singleton subspace")
}

/// Reachability of a pure state of coherence rank at least `target_rank`
/// under stochastic strictly incoherent operations: such a transformation
/// exists precisely when some incoherent projector compresses `rho` to a
/// fully coherent pure block of rank at least `target_rank`.
///
/// Returns the witness projector, or `None` when no pure state of that rank
/// (or higher) is reachable.
pub fn ssio_pure_reachable<T: RealScalar>(
    rho: &DensityMatrix<T>,
    target_rank: usize,
    tol: T,
) -> Result<Option<IncoherentProjector>> {
    check_dim(rho.dim())?;
    assert!(
        target_rank < rho.dim(),
        "target rank must be below the dimension"
    );
    for projector in projectors_largest_first(rho.dim(), target_rank + 1) {
        if pure_subspace_at(rho, &projector, tol).is_some() {
            return Ok(Some(projector));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::default_rank_tol;

    type M = ComplexMatrix<f64>;
    type C = Complex<f64>;

    fn r(x: f64) -> C {
        C::new(x, 0.0)
    }

    fn three_level_state() -> DensityMatrix<f64> {
        let s6 = 6f64.sqrt();
        DensityMatrix::new(
            M::from_rows(&[
                vec![r(2.0 / 8.0), r(1.0 / 8.0), r(s6 / 8.0)],
                vec![r(1.0 / 8.0), r(2.0 / 8.0), r(s6 / 8.0)],
                vec![r(s6 / 8.0), r(s6 / 8.0), r(4.0 / 8.0)],
            ])
            .unwrap(),
        )
        .unwrap()
    }

    fn four_level_input_state() -> DensityMatrix<f64> {
        let s5 = 5f64.sqrt();
        let n = 1.0 / (5.0 * 2f64.sqrt());
        let phi1 =
            StateVector::new(vec![r(4.0 * n), r(3.0 * n), r(s5 * n), r(2.0 * s5 * n)]).unwrap();
        let phi2 =
            StateVector::new(vec![r(-3.0 * n), r(4.0 * n), r(-2.0 * s5 * n), r(s5 * n)]).unwrap();
        DensityMatrix::from_mixture(&[(0.5, phi1), (0.5, phi2)]).unwrap()
    }

    fn four_level_output_state() -> DensityMatrix<f64> {
        let phi = StateVector::new(vec![
            r(1.0 / 2f64.sqrt()),
            r(1.0 / 2f64.sqrt()),
            r(0.0),
            r(0.0),
        ])
        .unwrap();
        DensityMatrix::from_pure(&phi).unwrap()
    }

    #[test]
    fn enumeration_counts_and_order() {
        let ps = enumerate_incoherent_projectors(3, 2).unwrap();
        let sets: Vec<Vec<usize>> = ps.iter().map(|p| p.indices().to_vec()).collect();
        assert_eq!(
            sets,
            vec![vec![1, 2], vec![1, 3], vec![2, 3], vec![1, 2, 3]]
        );

        assert_eq!(enumerate_incoherent_projectors(4, 2).unwrap().len(), 11);
        assert_eq!(enumerate_incoherent_projectors(2, 2).unwrap().len(), 1);
        assert!(matches!(
            enumerate_incoherent_projectors(17, 1),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn projector_validation() {
        assert!(IncoherentProjector::new(3, vec![]).is_err());
        assert!(IncoherentProjector::new(3, vec![2, 2]).is_err());
        assert!(IncoherentProjector::new(3, vec![0, 1]).is_err());
        assert!(IncoherentProjector::new(3, vec![1, 4]).is_err());
        assert!(IncoherentProjector::new(3, vec![1, 3]).is_ok());
    }

    #[test]
    fn three_level_pair_block_is_mixed() {
        // Oracle: the {1,2} block (1/8)[[2,1],[1,2]] has determinant 3/64,
        // so the compressed state cannot be pure.
        let det = (2.0f64 / 8.0) * (2.0 / 8.0) - (1.0 / 8.0) * (1.0 / 8.0);
        assert!((det - 3.0 / 64.0).abs() < 1e-15);

        let rho = three_level_state();
        let p = IncoherentProjector::new(3, vec![1, 2]).unwrap();
        assert!(pure_subspace_at(&rho, &p, default_rank_tol()).is_none());
    }

    #[test]
    fn four_level_output_has_pure_pair_block() {
        let rho = four_level_output_state();
        let p = IncoherentProjector::new(4, vec![1, 2]).unwrap();
        let (state, rank) = pure_subspace_at(&rho, &p, default_rank_tol()).unwrap();
        assert_eq!(rank, 1);
        let s = 1.0 / 2f64.sqrt();
        assert!((state.amplitudes()[0] - r(s)).norm() < 1e-12);
        assert!((state.amplitudes()[1] - r(s)).norm() < 1e-12);
        assert!(state.amplitudes()[2].norm() < 1e-15);
        assert!(state.amplitudes()[3].norm() < 1e-15);
    }

    #[test]
    fn singleton_block_of_diagonal_state() {
        let rho = DensityMatrix::new(M::identity(3).scale(r(1.0 / 3.0))).unwrap();
        let p = IncoherentProjector::new(3, vec![2]).unwrap();
        let (state, rank) = pure_subspace_at(&rho, &p, default_rank_tol()).unwrap();
        assert_eq!(rank, 0);
        assert!((state.amplitudes()[1] - r(1.0)).norm() < 1e-15);
    }

    #[test]
    fn vanishing_compressed_trace_is_empty() {
        let rho = DensityMatrix::new(
            M::from_rows(&[vec![r(1.0), r(0.0)], vec![r(0.0), r(0.0)]]).unwrap(),
        )
        .unwrap();
        let p = IncoherentProjector::new(2, vec![2]).unwrap();
        assert!(pure_subspace_at(&rho, &p, 1e-9).is_none());
    }

    #[test]
    fn maximal_subspace_of_four_level_instance() {
        let input = four_level_input_state();
        let report = max_pure_coherent_subspace(&input, default_rank_tol()).unwrap();
        assert_eq!(report.max_dimension, 1);

        let output = four_level_output_state();
        let report = max_pure_coherent_subspace(&output, default_rank_tol()).unwrap();
        assert_eq!(report.max_dimension, 2);
        assert_eq!(report.witness_projector.indices(), &[1, 2]);
    }

    #[test]
    fn maximal_subspace_of_fully_coherent_pure_state() {
        let d = 4;
        let amp = r(0.5);
        let phi = StateVector::new(vec![amp; d]).unwrap();
        let rho = DensityMatrix::from_pure(&phi).unwrap();
        let report = max_pure_coherent_subspace(&rho, default_rank_tol()).unwrap();
        assert_eq!(report.max_dimension, d);
        assert_eq!(report.witness_projector.indices(), &[1, 2, 3, 4]);
    }

    #[test]
    fn maximal_subspace_of_maximally_mixed_state() {
        let rho = DensityMatrix::new(M::identity(3).scale(r(1.0 / 3.0))).unwrap();
        let report = max_pure_coherent_subspace(&rho, default_rank_tol()).unwrap();
        assert_eq!(report.max_dimension, 1);
        assert_eq!(report.witness_projector.indices(), &[1]);
    }

    #[test]
    fn three_level_state_unreachable_at_rank_one() {
        let rho = three_level_state();
        assert!(ssio_pure_reachable(&rho, 1, default_rank_tol())
            .unwrap()
            .is_none());
        // Rank 0 always reachable.
        assert!(ssio_pure_reachable(&rho, 0, default_rank_tol())
            .unwrap()
            .is_some());
    }

    #[test]
    fn four_level_input_unreachable_at_rank_one() {
        // Oracle: all six 2x2 principal blocks have nonzero determinant.
        let rho = four_level_input_state();
        let m = rho.matrix();
        for i in 0..4 {
            for j in (i + 1)..4 {
                let det = m.get(i, i) * m.get(j, j) - m.get(i, j) * m.get(j, i);
                assert!(det.norm() > 1e-3, "block ({i},{j}) unexpectedly singular");
            }
        }
        assert!(ssio_pure_reachable(&rho, 1, default_rank_tol())
            .unwrap()
            .is_none());
    }

    #[test]
    fn uniform_pure_state_reachable_at_full_rank() {
        let s = 1.0 / 3f64.sqrt();
        let phi = StateVector::new(vec![r(s); 3]).unwrap();
        let rho = DensityMatrix::from_pure(&phi).unwrap();
        let witness = ssio_pure_reachable(&rho, 2, default_rank_tol())
            .unwrap()
            .unwrap();
        assert_eq!(witness.indices(), &[1, 2, 3]);
    }

    #[test]
    fn reachable_rank_is_monotone() {
        let rho = four_level_output_state();
        let mut reach = Vec::new();
        for rank in 0..4 {
            reach.push(
                ssio_pure_reachable(&rho, rank, default_rank_tol())
                    .unwrap()
                    .is_some(),
            );
        }
        for w in reach.windows(2) {
            assert!(!(w[1] && !w[0]), "higher rank reachable but lower not");
        }
    }
}
