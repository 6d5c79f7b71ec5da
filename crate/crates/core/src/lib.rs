//! Limit sets, bumping, and characteristic submanifold combinatorics for
//! geometrically finite groups of Möbius transformations.
//!
//! The crate is `no_std + alloc`: every algorithm here is deterministic and
//! pure, with all IO and rendering in the companion CLI crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bumping;
pub mod charsub;
pub mod charts;
pub mod components;
pub mod error;
pub mod fuchsian;
pub mod group;
pub mod limitset;
pub mod math;
pub mod moebius;
pub mod nielsen;
pub mod pointset;
pub mod stallings;
pub mod tolerances;
pub mod uniform;

pub use error::{Error, Result};
pub use moebius::{MoebiusMap, SpherePoint};
