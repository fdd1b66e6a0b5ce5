//! Gamma-type moment sequences and their moment problems.
//!
//! The crate generates the classical Gamma-ratio moment sequences in log
//! scale, checks Bernstein factorizations and Lévy/Malmstén exponential
//! representations numerically, probes infinite divisibility through Hankel
//! positivity, classifies moment (in)determinacy, and recovers densities of
//! the multiplicative Gumbel semigroup by Mellin inversion.
//!
//! Everything runs in binary64. Results are numeric evidence, not proofs.

// `!(x > 0.0)` is used on purpose so that NaN fails domain checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

pub mod bernstein;
pub mod diagnostics;
pub mod error;
pub mod idlab;
pub mod linalg;
pub mod meldens;
pub mod momentseq;
pub mod specfun;

pub use error::{Error, Result};
