//! Tilting bundles consisting of line bundles on smooth toric Fano DM stacks of Picard
//! rank one and two, classified through upper sets of the Picard group.
//!
//! The combinatorial core works with `i64` coordinates; exact linear algebra is generic
//! over the integer scalar and is instantiated with [`Int`] wherever intermediate
//! values can grow.

pub mod abgroup;
pub mod cuts;
pub mod graded_order;
pub mod linalg;
pub mod quiver;
pub mod stacky_geom;
pub mod tilting;
pub mod upper_sets;

/// Arbitrary-precision integer scalar.
pub type Int = num_bigint::BigInt;
/// Exact rational scalar.
pub type Rat = num_rational::BigRational;

pub use abgroup::{FgAbelianGroup, GroupElement};
pub use graded_order::GradedDegreeGroup;
