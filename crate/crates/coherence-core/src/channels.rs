//! Kraus operators, structural classification, channel validation, and
//! deterministic / post-selected application.
//!
//! Classification is purely structural: an operator is incoherent when every
//! column holds at most one significant entry, and strictly incoherent when
//! rows pass the same test too. The action-based check
//! ([`is_incoherent_by_action`]) exists as an independent cross-validation
//! oracle, not as the operative definition.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::qcore::{ComplexMatrix, DensityMatrix};
use crate::{real_from, seeding, RealScalar};

/// Default absolute modulus threshold separating intended zeros from
/// arithmetic dust in structural classification.
pub fn default_entry_tol<T: RealScalar>() -> T {
    real_from(1e-12)
}

/// Entrywise tolerance on `sum K^dag K - I` for trace preservation, and the
/// eigenvalue slack for sub-normalization.
pub fn channel_tol<T: RealScalar>() -> T {
    real_from(1e-9)
}

/// Structural class of a Kraus operator.
///
/// `StrictlyIncoherent` implies the operator also passes the column-only
/// (incoherent) test. The zero operator passes both tests vacuously and is
/// classified strictly incoherent; channels exclude it operationally through
/// the vanishing-probability error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrausClass {
    StrictlyIncoherent,
    IncoherentOnly,
    NotIncoherent,
}

impl KrausClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            KrausClass::StrictlyIncoherent => "StrictlyIncoherent",
            KrausClass::IncoherentOnly => "IncoherentOnly",
            KrausClass::NotIncoherent => "NotIncoherent",
        }
    }

    /// True for both incoherent classes.
    pub fn is_incoherent(&self) -> bool {
        !matches!(self, KrausClass::NotIncoherent)
    }
}

impl std::fmt::Display for KrausClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A square Kraus operator.
///
/// Construction checks shape and finiteness only. Operator norm at most 1
/// is required for membership in a valid (sub-)channel and is enforced by
/// [`validate_channel`] / [`apply_stochastic`], which lets over-normalized
/// candidates be examined and flagged `Invalid` rather than rejected up
/// front.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausOperator<T: RealScalar> {
    matrix: ComplexMatrix<T>,
}

impl<T: RealScalar> KrausOperator<T> {
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    /// Structural classification per the column / row nonzero-count tests.
    pub fn classify(&self, tol: T) -> KrausClass {
        let d = self.dim();
        let significant = |z: Complex<T>| z.norm() > tol;
        for j in 0..d {
            let col_count = (0..d).filter(|&i| significant(self.matrix.get(i, j))).count();
            if col_count >= 2 {
                return KrausClass::NotIncoherent;
            }
        }
        for i in 0..d {
            let row_count = (0..d).filter(|&j| significant(self.matrix.get(i, j))).count();
            if row_count >= 2 {
                return KrausClass::IncoherentOnly;
            }
        }
        KrausClass::StrictlyIncoherent
    }
}

/// Classify with the default entry threshold.
pub fn classify_kraus<T: RealScalar>(k: &KrausOperator<T>) -> KrausClass {
    k.classify(default_entry_tol())
}

/// Action-based incoherence check: samples `trials` random diagonal states
/// and tests that every image `K rho K^dag` stays diagonal (off-diagonal
/// moduli at most 1e-10). Deterministic per seed.
pub fn is_incoherent_by_action<T: RealScalar>(
    k: &KrausOperator<T>,
    trials: usize,
    seed: u64,
) -> bool {
    assert!(trials >= 1, "at least one trial required");
    let d = k.dim();
    let mut rng = seeding::rng_from(seed);
    let bound: T = real_from(1e-10);
    for _ in 0..trials {
        let weights: Vec<T> = seeding::simplex_weights(d, &mut rng);
        let mut rho = ComplexMatrix::zeros(d, d);
        for (i, w) in weights.iter().enumerate() {
            rho.set(i, i, Complex::new(*w, T::zero()));
        }
        let image = k.matrix.mul(&rho).mul(&k.matrix.dagger());
        for i in 0..d {
            for j in 0..d {
                if i != j && image.get(i, j).norm() > bound {
                    return false;
                }
            }
        }
    }
    true
}

/// Completeness kind of a Kraus family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    TracePreserving,
    SubNormalized,
    Invalid,
}

impl ChannelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChannelKind::TracePreserving => "TracePreserving",
            ChannelKind::SubNormalized => "SubNormalized",
            ChannelKind::Invalid => "Invalid",
        }
    }
}

/// A validated family of Kraus operators together with its completeness
/// kind.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec<T: RealScalar> {
    kraus_ops: Vec<KrausOperator<T>>,
    kind: ChannelKind,
}

impl<T: RealScalar> ChannelSpec<T> {
    pub fn kraus_ops(&self) -> &[KrausOperator<T>] {
        &self.kraus_ops
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.kraus_ops[0].dim()
    }

    /// `sum K^dag K` over the family.
    pub fn completeness_sum(&self) -> ComplexMatrix<T> {
        completeness_sum(&self.kraus_ops)
    }
}

fn completeness_sum<T: RealScalar>(ops: &[KrausOperator<T>]) -> ComplexMatrix<T> {
    let d = ops[0].dim();
    let mut acc = ComplexMatrix::zeros(d, d);
    for k in ops {
        acc = acc.add(&k.matrix().dagger().mul(k.matrix()));
    }
    acc
}

/// Compute the completeness kind of a Kraus family.
///
/// Trace preservation is an entrywise test on `sum K^dag K - I`;
/// sub-normalization is the spectral condition that every eigenvalue of the
/// sum stays at most `1 + 1e-9`.
pub fn validate_channel<T: RealScalar>(ops: Vec<KrausOperator<T>>) -> Result<ChannelSpec<T>> {
    if ops.is_empty() {
        return Err(Error::EmptyChannel);
    }
    let d = ops[0].dim();
    for k in &ops {
        if k.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: k.dim(),
            });
        }
    }
    let sum = completeness_sum(&ops);
    let tol = channel_tol::<T>();
    let kind = if sum.max_abs_diff(&ComplexMatrix::identity(d)) <= tol {
        ChannelKind::TracePreserving
    } else {
        let (values, _) = crate::linalg::hermitian_eigen(d, sum.data());
        if values[0] <= T::one() + tol {
            ChannelKind::SubNormalized
        } else {
            ChannelKind::Invalid
        }
    };
    Ok(ChannelSpec {
        kraus_ops: ops,
        kind,
    })
}

/// Deterministic application `rho -> sum K rho K^dag` of a trace-preserving
/// channel.
pub fn apply_channel<T: RealScalar>(
    spec: &ChannelSpec<T>,
    rho: &DensityMatrix<T>,
) -> Result<DensityMatrix<T>> {
    if spec.kind != ChannelKind::TracePreserving {
        return Err(Error::NotTracePreserving);
    }
    if spec.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: spec.dim(),
        });
    }
    let out = kraus_image(&spec.kraus_ops, rho);
    DensityMatrix::new(out)
}

/// Post-selected application of a sub-normalized Kraus subset: returns the
/// renormalized outcome state and its probability `Tr(sum K rho K^dag)`.
pub fn apply_stochastic<T: RealScalar>(
    subset: &[KrausOperator<T>],
    rho: &DensityMatrix<T>,
) -> Result<(DensityMatrix<T>, T)> {
    let spec = validate_channel(subset.to_vec())?;
    if spec.kind == ChannelKind::Invalid {
        return Err(Error::InvalidChannel);
    }
    if spec.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: spec.dim(),
        });
    }
    let image = kraus_image(&spec.kraus_ops, rho);
    let p = image.trace().re;
    if p <= real_from(1e-12) {
        return Err(Error::VanishingProbability);
    }
    let inv = Complex::new(T::one() / p, T::zero());
    let state = DensityMatrix::new(image.scale(inv))?;
    Ok((state, p))
}

fn kraus_image<T: RealScalar>(
    ops: &[KrausOperator<T>],
    rho: &DensityMatrix<T>,
) -> ComplexMatrix<T> {
    let d = rho.dim();
    let mut acc = ComplexMatrix::zeros(d, d);
    for k in ops {
        acc = acc.add(&k.matrix().mul(rho.matrix()).mul(&k.matrix().dagger()));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::StateVector;

    type M = ComplexMatrix<f64>;
    type C = Complex<f64>;

    fn r(x: f64) -> C {
        C::new(x, 0.0)
    }

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn kraus(rows: &[Vec<C>]) -> KrausOperator<f64> {
        KrausOperator::new(M::from_rows(rows).unwrap()).unwrap()
    }

    fn three_level_state() -> DensityMatrix<f64> {
        let s6 = 6f64.sqrt();
        let m = M::from_rows(&[
            vec![r(2.0 / 8.0), r(1.0 / 8.0), r(s6 / 8.0)],
            vec![r(1.0 / 8.0), r(2.0 / 8.0), r(s6 / 8.0)],
            vec![r(s6 / 8.0), r(s6 / 8.0), r(4.0 / 8.0)],
        ])
        .unwrap();
        DensityMatrix::new(m).unwrap()
    }

    fn merging_kraus(k: f64) -> KrausOperator<f64> {
        kraus(&[
            vec![r(k), r(k), r(0.0)],
            vec![r(0.0), r(0.0), r(k)],
            vec![r(0.0), r(0.0), r(0.0)],
        ])
    }

    #[test]
    fn classify_merging_operator_as_incoherent_only() {
        let k = merging_kraus(1.0 / 2f64.sqrt());
        assert_eq!(classify_kraus(&k), KrausClass::IncoherentOnly);
    }

    #[test]
    fn classify_diagonal_as_strictly_incoherent() {
        let k = kraus(&[vec![c(0.4, 0.2), r(0.0)], vec![r(0.0), c(-0.3, 0.6)]]);
        assert_eq!(classify_kraus(&k), KrausClass::StrictlyIncoherent);
        assert_eq!(classify_kraus(&kraus(&[vec![r(1.0), r(0.0)], vec![r(0.0), r(1.0)]])),
            KrausClass::StrictlyIncoherent);
    }

    #[test]
    fn classify_doubled_column_as_not_incoherent() {
        let k = kraus(&[vec![r(1.0), r(0.0)], vec![r(1.0), r(0.0)]]);
        assert_eq!(classify_kraus(&k), KrausClass::NotIncoherent);
    }

    #[test]
    fn zero_operator_classifies_strictly_incoherent() {
        let k = kraus(&[vec![r(0.0); 2], vec![r(0.0); 2]]);
        assert_eq!(classify_kraus(&k), KrausClass::StrictlyIncoherent);
    }

    #[test]
    fn action_check_agrees_on_examples() {
        let diag = kraus(&[vec![r(0.8), r(0.0)], vec![r(0.0), r(0.5)]]);
        assert!(is_incoherent_by_action(&diag, 25, 1));

        let bad = kraus(&[vec![r(1.0), r(0.0)], vec![r(1.0), r(0.0)]]);
        // Hand check: the image of |1><1| under [[1,0],[1,0]] is the all-ones
        // matrix, which has off-diagonal modulus 1.
        assert!(!is_incoherent_by_action(&bad, 25, 1));

        let single_row = kraus(&[vec![c(0.5, 0.1), c(-0.4, 0.3)], vec![r(0.0), r(0.0)]]);
        assert!(is_incoherent_by_action(&single_row, 25, 1));
    }

    #[test]
    fn strictly_incoherent_closed_under_dagger() {
        let perm = kraus(&[vec![r(0.0), c(0.0, 0.7)], vec![r(0.6), r(0.0)]]);
        assert_eq!(classify_kraus(&perm), KrausClass::StrictlyIncoherent);
        let dag = KrausOperator::new(perm.matrix().dagger()).unwrap();
        assert_eq!(classify_kraus(&dag), KrausClass::StrictlyIncoherent);
    }

    #[test]
    fn validate_two_operator_merging_channel() {
        let k = 1.0 / 2f64.sqrt();
        let k1 = merging_kraus(k);
        let k2 = kraus(&[
            vec![r(k), r(-k), r(0.0)],
            vec![r(0.0), r(0.0), r(k)],
            vec![r(0.0), r(0.0), r(0.0)],
        ]);
        let spec = validate_channel(vec![k1, k2]).unwrap();
        assert_eq!(spec.kind(), ChannelKind::TracePreserving);
    }

    #[test]
    fn validate_single_merging_operator_subnormalized() {
        let k = merging_kraus(1.0 / 2f64.sqrt());
        // Oracle: K^dag K has eigenvalues {1, 1/2, 0}.
        let gram = k.matrix().dagger().mul(k.matrix());
        let (vals, _) = crate::linalg::hermitian_eigen(3, gram.data());
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 0.5).abs() < 1e-12);
        assert!(vals[2].abs() < 1e-12);

        let spec = validate_channel(vec![k]).unwrap();
        assert_eq!(spec.kind(), ChannelKind::SubNormalized);
    }

    #[test]
    fn validate_oversized_family_invalid() {
        let two_id = kraus(&[vec![r(2.0), r(0.0)], vec![r(0.0), r(2.0)]]);
        let spec = validate_channel(vec![two_id]).unwrap();
        assert_eq!(spec.kind(), ChannelKind::Invalid);
        assert!(matches!(
            validate_channel::<f64>(vec![]),
            Err(Error::EmptyChannel)
        ));
    }

    #[test]
    fn apply_identity_channel_is_identity() {
        let id = kraus(&[vec![r(1.0), r(0.0)], vec![r(0.0), r(1.0)]]);
        let spec = validate_channel(vec![id]).unwrap();
        let plus = StateVector::new(vec![r(1.0 / 2f64.sqrt()); 2]).unwrap();
        let rho = DensityMatrix::from_pure(&plus).unwrap();
        let out = apply_channel(&spec, &rho).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn apply_channel_requires_trace_preservation() {
        let half = kraus(&[vec![r(0.5), r(0.0)], vec![r(0.0), r(0.5)]]);
        let spec = validate_channel(vec![half]).unwrap();
        let rho = DensityMatrix::new(M::identity(2).scale(r(0.5))).unwrap();
        assert!(matches!(
            apply_channel(&spec, &rho),
            Err(Error::NotTracePreserving)
        ));
    }

    #[test]
    fn merging_channel_matches_brute_force_arithmetic() {
        // Independent oracle: raw complex arithmetic on (re, im) pairs.
        let k = 1.0 / 2f64.sqrt();
        let rho = three_level_state();
        let ops = vec![
            merging_kraus(k),
            kraus(&[
                vec![r(k), r(-k), r(0.0)],
                vec![r(0.0), r(0.0), r(k)],
                vec![r(0.0), r(0.0), r(0.0)],
            ]),
        ];
        let spec = validate_channel(ops.clone()).unwrap();
        let out = apply_channel(&spec, &rho).unwrap();
        assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);

        let raw_mul = |a: &Vec<Vec<(f64, f64)>>, b: &Vec<Vec<(f64, f64)>>| -> Vec<Vec<(f64, f64)>> {
            let n = a.len();
            let mut out = vec![vec![(0.0, 0.0); n]; n];
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        let (ar, ai) = a[i][l];
                        let (br, bi) = b[l][j];
                        out[i][j].0 += ar * br - ai * bi;
                        out[i][j].1 += ar * bi + ai * br;
                    }
                }
            }
            out
        };
        let to_raw = |m: &M| -> Vec<Vec<(f64, f64)>> {
            (0..3)
                .map(|i| (0..3).map(|j| (m.get(i, j).re, m.get(i, j).im)).collect())
                .collect()
        };
        let conj_t = |m: &Vec<Vec<(f64, f64)>>| -> Vec<Vec<(f64, f64)>> {
            (0..3)
                .map(|i| (0..3).map(|j| (m[j][i].0, -m[j][i].1)).collect())
                .collect()
        };
        let mut expect = vec![vec![(0.0, 0.0); 3]; 3];
        for op in &ops {
            let km = to_raw(op.matrix());
            let term = raw_mul(&raw_mul(&km, &to_raw(rho.matrix())), &conj_t(&km));
            for i in 0..3 {
                for j in 0..3 {
                    expect[i][j].0 += term[i][j].0;
                    expect[i][j].1 += term[i][j].1;
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let got = out.matrix().get(i, j);
                assert!((got.re - expect[i][j].0).abs() < 1e-12);
                assert!((got.im - expect[i][j].1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn post_selection_on_merging_operator() {
        let rho = three_level_state();
        let k = merging_kraus(1.0 / 2f64.sqrt());
        let (state, p) = apply_stochastic(&[k], &rho).unwrap();
        assert!((p - 5.0 / 8.0).abs() < 1e-12);
        let s6 = 6f64.sqrt();
        let expect = M::from_rows(&[
            vec![r(3.0 / 5.0), r(s6 / 5.0), r(0.0)],
            vec![r(s6 / 5.0), r(2.0 / 5.0), r(0.0)],
            vec![r(0.0), r(0.0), r(0.0)],
        ])
        .unwrap();
        assert!(state.matrix().max_abs_diff(&expect) < 1e-12);
        assert!((state.matrix().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_family_post_selects_with_probability_one() {
        let k = 1.0 / 2f64.sqrt();
        let ops = vec![
            merging_kraus(k),
            kraus(&[
                vec![r(k), r(-k), r(0.0)],
                vec![r(0.0), r(0.0), r(k)],
                vec![r(0.0), r(0.0), r(0.0)],
            ]),
        ];
        let rho = three_level_state();
        let (_, p) = apply_stochastic(&ops, &rho).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vanishing_probability_is_an_error() {
        // [[0, a], [0, 0]] kills diag(1, 0).
        let k = kraus(&[vec![r(0.0), r(0.7)], vec![r(0.0), r(0.0)]]);
        let rho = DensityMatrix::new(
            M::from_rows(&[vec![r(1.0), r(0.0)], vec![r(0.0), r(0.0)]]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            apply_stochastic(&[k], &rho),
            Err(Error::VanishingProbability)
        ));
    }

    #[test]
    fn incoherent_operator_preserves_diagonality() {
        let mut rng = crate::seeding::rng_from(9);
        for _ in 0..50 {
            let d = 3;
            let weights: Vec<f64> = crate::seeding::simplex_weights(d, &mut rng);
            let mut m = M::zeros(d, d);
            for (i, w) in weights.iter().enumerate() {
                m.set(i, i, r(*w));
            }
            let rho = DensityMatrix::new(m).unwrap();
            let k = merging_kraus(1.0 / 2f64.sqrt());
            let image = k.matrix().mul(rho.matrix()).mul(&k.matrix().dagger());
            for i in 0..d {
                for j in 0..d {
                    if i != j {
                        assert!(image.get(i, j).norm() < 1e-12);
                    }
                }
            }
        }
    }
}
