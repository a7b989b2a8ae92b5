//! Exact sum-product machinery over prime fields.
//!
//! * [`field`]: arithmetic in Z/qZ.
//! * [`setops`]: sum, product, difference and ratio sets, `S_ξ(A)`, `I(A)` and
//!   the multiplicity tables behind them.
//! * [`mult_structure`]: popular ratios, generated subgroups, cosets and the
//!   per-coset difference statistics.
//! * [`witness`]: witness extraction (collisions, dilated embeddings, choices of ξ).
//! * [`verify`]: per-set checks of the lower bounds on `|I(A)|` and the sum-product exponent.
//! * [`explorer`]: exhaustive and family scans.

pub mod error;
pub mod explorer;
pub mod field;
pub mod mult_structure;
pub mod ratio;
pub mod setops;
pub mod verify;
pub mod witness;

pub use error::{Error, Result};
pub use field::{make_field, FieldElement, PrimeField};
pub use setops::{CountTable, FieldSet};
