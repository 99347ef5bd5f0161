//! Numerics for Kirchhoff Laplacians on infinite metric graphs.
//!
//! The crate works with sphere-stratified graph families (antitrees, rope
//! ladders, radially symmetric trees), detects their ends and volume classes,
//! builds Kirchhoff-harmonic functions through sphere recurrences, estimates
//! deficiency indices of the minimal Kirchhoff Laplacian, parametrizes
//! self-adjoint and Markovian extensions through finite-dimensional linear
//! relations, and cross-checks the quantitative claims on truncations with a
//! finite-difference discretization.
//!
//! See the guide under `book/` for worked examples; its code blocks run as
//! doc-tests of this crate.

pub mod ends;
pub mod error;
pub mod graph;
pub mod harmonic;
pub mod relations;
pub mod report;
mod rng;
pub mod series;
pub mod spectral;
pub mod verify;

#[cfg(doctest)]
mod book {
    //! The guide's code blocks compile and run against the public API.
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/ends.md")]
    mod ends {}
    #[doc = include_str!("../../../book/src/harmonic.md")]
    mod harmonic {}
    #[doc = include_str!("../../../book/src/extensions.md")]
    mod extensions {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
}
