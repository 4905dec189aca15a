//! Kernels for studying integers with a typical number of distinct prime
//! factors: exact ω(n) and windowed ω(n;y,z) sieving, the δ-normal
//! predicate and its correlated counts, nearest-neighbour spacing
//! statistics, joint characteristic functions, and the exact f-function
//! correlation calculus.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is
//! sequential and deterministic; the `omegaspace` crate layers parallel
//! drivers, file formats, and the command line on top.

#![no_std]
// `!(v > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod charfunc;
pub mod error;
pub mod fmodel;
pub mod normality;
pub mod omega;
pub mod primes;
pub mod spacings;
pub mod sum;

pub use error::{Error, Result};
pub use normality::{Convention, NormalSequence, NormalityContext};
pub use omega::{OmegaHistogram, OmegaSegment, OmegaSieve, OmegaTable, WindowBounds};
pub use primes::{PrimeWindow, SieveBudget};

/// `log₂ x`, written here as `ln ln x` (natural logarithms throughout).
#[inline]
pub fn loglog(x: f64) -> f64 {
    libm::log(libm::log(x))
}
