// Indexed loops read better than iterator chains in the tableau and
// matrix kernels.
#![allow(clippy::needless_range_loop)]

//! Quantitative analysis of empirical models of measurement scenarios.
//!
//! An empirical model is a family of probability distributions, one per
//! measurement context. This crate provides:
//!
//! - [`scenario`]: scenarios, distributions, empirical models, marginals,
//!   and the no-signalling check, with a JSON wire format;
//! - [`fractions`]: non-contextual, no-signalling and causal fractions by
//!   exact linear programs, closed-form fast paths, and the CHSH/KCBS
//!   inequality values;
//! - [`cbd`]: Contextuality-by-Default measures on cyclic systems and the
//!   consistentification construction;
//! - [`qsim`]: a small exact quantum simulator with the two-party
//!   variational circuit, training, and entanglement measures;
//! - [`parsing`]: incremental dependency parses, per-word signalling
//!   fractions, reading-time regression, and garden-path effects.

pub mod cbd;
pub mod error;
pub mod fractions;
pub mod parsing;
pub mod qsim;
pub mod scenario;
pub mod simplex;

pub use error::Error;

/// Shorthand result type used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
