//! Partition lattices, lattice terms and small generating sets of their
//! direct powers.

pub mod auth;
pub mod certificate;
pub mod combinatorics;
pub mod error;
pub mod genset;
pub mod partition;
pub mod power;
pub mod rng;
pub mod term;
pub mod zadori;

pub use error::{Error, Result};
pub use partition::{LatticeShape, Partition, PartitionTuple, Permutation};
pub use rng::ShiftRng;
pub use term::{Term, TermArena};
