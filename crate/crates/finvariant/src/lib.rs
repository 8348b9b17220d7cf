//! Entropy of free-group actions, computed exactly at desk scale.
//!
//! The crate computes the f-invariant entropy of measure-preserving
//! actions of finitely generated free groups for two concrete measure
//! classes — tree-indexed Markov measures and finite permutation actions —
//! and verifies, numerically and combinatorially, the subgroup formula
//!
//! ```text
//! f_H = |G : H| * f_G
//! ```
//!
//! for finite-index subgroups H, together with every identity the formula
//! rests on (ball counts, transversal edge counts, Schreier rank,
//! Markov approximation invariance, recoding invariance).
//!
//! Modules:
//! * [`word`], [`cayley`] — reduced words and the combinatorics of the
//!   right/left Cayley trees;
//! * [`subgroup`] — coset actions, Schreier transversals and free
//!   generators, normality, normal cores, exact edge-count identities;
//! * [`measure`] — tree-Markov measures and finite actions with exact
//!   marginals;
//! * [`entropy`] — Shannon kernels, the finite functional F, its ball
//!   limit, and the entropy inequalities;
//! * [`transform`] — subgroup restriction, block recoding, Markov
//!   approximation;
//! * [`config`], [`report`], [`cli`] — the batch front end used by the
//!   `finv` binary.
//!
//! Start with the `examples/` directory: each file is a runnable tour of
//! one capability.

pub mod cayley;
pub mod cli;
pub mod config;
pub mod entropy;
pub mod measure;
pub mod report;
pub mod sample;
pub mod subgroup;
pub mod transform;
pub mod word;

mod error;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
