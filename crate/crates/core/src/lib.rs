//! Exact computations on Picard lattices of del Pezzo surfaces: Weyl group
//! actions, first cohomology over Z, and the algebraic Brauer groups of the
//! complement of a smooth anticanonical curve.

pub mod bounds;
pub mod brauer_table;
pub mod error;
pub mod lattice;
pub mod subgroups;
pub mod weyl;
pub mod zcohomology;

pub use error::{Error, Result};
