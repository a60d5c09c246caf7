//! Exact linear algebra over GF(p) and the lattice of subspaces.
//!
//! `p = 3` with at most 32 coordinates runs on the bit-sliced kernel in
//! [`gf3`]; everything else uses the scalar routines in [`MatGF`].

pub mod gf3;
mod matrix;
mod subspace;

pub use gf3::Trits;
pub use matrix::MatGF;
pub use subspace::{Subspace, SubspaceRecord};
