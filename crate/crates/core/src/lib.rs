//! Exact ordinal combinatorics below ε₀, Schreier families and norms,
//! well-founded tree orders, and exact certificates for ℓ1-type sequences
//! and trees in polyhedral Banach spaces.
//!
//! All arithmetic is exact: ordinals are kept in Cantor normal form and
//! scalars are arbitrary precision rationals.

pub mod bounds;
pub mod cspace;
pub mod error;
pub mod indexlab;
pub mod lp;
pub mod ord;
pub mod rat;
pub mod schreier;
pub mod seqcheck;
pub mod trees;
pub mod xnorm;

pub use error::{Error, Result};
pub use ord::Ordinal;
pub use rat::Q;
pub use schreier::{FinSet, SchreierIndex};
pub use xnorm::SchreierVector;

/// Version string embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Identifier of the fixed fundamental-sequence convention.
pub const CONVENTION: &str = "wainer-cnf-v1";
