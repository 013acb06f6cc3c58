//! Finite, exact models of trees, dendroidal sets, Γ-sets and generalized
//! Reedy categories.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod finset_cat;
pub mod gamma_bpq;
pub mod operad;
pub mod presheaf;
pub mod reedy_core;
pub mod slice_yoneda;
pub mod tree_cat;

pub use error::{Error, Result};
