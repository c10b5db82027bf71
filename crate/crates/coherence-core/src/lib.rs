//! Verification and feasibility-search toolkit for transformations of
//! quantum coherence under incoherent operations.
//!
//! Everything is expressed in a fixed reference basis `{|1>, ..., |d>}`.
//! The crate provides:
//!
//! - [`qcore`]: dense complex matrices, state vectors, density matrices,
//!   Hermitian eigendecomposition, dephasing, and the coherence rank of
//!   pure states;
//! - [`channels`]: Kraus operators, their structural classification
//!   (strictly incoherent / incoherent / neither), channel validation, and
//!   deterministic or post-selected application;
//! - [`subspace`]: incoherent projectors and maximal pure coherent-state
//!   subspaces;
//! - [`feasibility`]: exact single-Kraus stochastic reachability of pure
//!   states via structural pattern enumeration plus linear ray-mapping
//!   solves, and a random-restart search for deterministic trace-preserving
//!   completions;
//! - [`campaigns`]: seeded random-instance generators and campaign runners
//!   producing machine-checkable reports.
//!
//! Core math is generic over the real scalar type through [`RealScalar`]
//! (`f32` or `f64`); concrete `*64` aliases are exported at the crate root.

#![forbid(unsafe_code)]
// Index loops over matrix rows/columns are the house style in the numeric
// kernels; iterator rewrites obscure the pairwise updates.
#![allow(clippy::needless_range_loop)]

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

pub mod campaigns;
pub mod channels;
pub mod error;
pub mod feasibility;
mod linalg;
pub mod qcore;
mod seeding;
pub mod subspace;

pub use error::{Error, Result};

/// Bundle of the floating-point trait bounds the numeric code needs.
///
/// Implemented for `f32` and `f64`. All tolerances in this crate are stated
/// as `f64` literals and converted with [`real_from`], so `f32` instantiations
/// inherit the same nominal thresholds (saturated to `f32` precision).
pub trait RealScalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
}

impl<T> RealScalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumAssign
        + Sum
        + Debug
        + Display
        + LowerExp
        + Send
        + Sync
        + 'static
{
}

/// Complex scalar over a real component type.
pub type ComplexScalar<T> = Complex<T>;

/// Convert an `f64` constant (tolerance, literal) into the working scalar.
pub fn real_from<T: RealScalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant must convert to the scalar type")
}

pub(crate) fn complex_from<T: RealScalar>(re: f64, im: f64) -> Complex<T> {
    Complex::new(real_from(re), real_from(im))
}

pub type C32 = ComplexScalar<f32>;
pub type C64 = ComplexScalar<f64>;

pub type Matrix32 = qcore::ComplexMatrix<f32>;
pub type Matrix64 = qcore::ComplexMatrix<f64>;
pub type State32 = qcore::StateVector<f32>;
pub type State64 = qcore::StateVector<f64>;
pub type Density32 = qcore::DensityMatrix<f32>;
pub type Density64 = qcore::DensityMatrix<f64>;
pub type Kraus32 = channels::KrausOperator<f32>;
pub type Kraus64 = channels::KrausOperator<f64>;
pub type Channel32 = channels::ChannelSpec<f32>;
pub type Channel64 = channels::ChannelSpec<f64>;
