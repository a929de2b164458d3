//! Exact computational machinery for torsion certificates in Schubert
//! calculus: symmetric group combinatorics, divided difference operators,
//! the nil Hecke ring, Schubert classes of the coinvariant ring, reduced
//! expression certificates, operator word searches, and SL(2,Z) semigroup
//! enumeration.
//!
//! All arithmetic is exact: coefficients are arbitrary-precision integers
//! and no floating point enters any certified value.

pub mod construct;
pub mod nilhecke;
pub mod poly;
pub mod schubert;
pub mod search;
pub mod selftest;
pub mod sym;
pub mod zaremba;

/// Version stamp for every serialized artifact this crate emits.
pub const SCHEMA_VERSION: &str = "1";
