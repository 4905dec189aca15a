//! Parallel drivers, file formats, and the command line for omegaspace
//! experiments. The algorithms themselves live in `omegaspace-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod checkpoint;
pub mod cli;
pub mod experiments;
pub mod format;
pub mod par;

pub use par::Parallel;
