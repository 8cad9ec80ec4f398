//! Measurement incompatibility in subspaces.
//!
//! The crate bundles a small dense SDP solver with the measurement-theoretic
//! machinery built on it: joint measurability and depolarising robustness of
//! POVM assemblages, truncation to subspaces and the resulting three-way
//! classification, coexistence via binarisations, and the steering side of
//! the correspondence (local hidden state models, pretty-good measurements,
//! Choi channels, PPT bound-entangled constructions).

pub mod coexist;
pub mod corpus;
pub mod error;
pub mod incompat;
pub mod linalg;
pub mod povm;
pub mod sdp;
pub mod steering;
pub mod subspace;

pub use error::{Error, Result};
