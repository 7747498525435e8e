//! Truncated free Lie algebra computations, Kashiwara-Vergne series, and
//! certified commutator factorizations in matrix algebras.

// `!(a <= b)` is used on purpose so that NaN fails a bound
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bch;
pub mod cli;
pub mod constructions;
pub mod error;
pub mod free_algebra;
pub mod kv;
pub mod matrix;

pub use error::{Error, Result};
