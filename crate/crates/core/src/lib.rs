//! Threshold additive homomorphic encryption and dropout-tolerant secure aggregation.

pub mod bench;
pub mod chain;
pub mod costmodel;
pub mod crypto;
pub mod ecelgamal;
pub mod error;
pub mod lattice;
pub mod ring;
pub mod protocol;
pub mod scheme;
pub mod seeds;
pub mod shamir;
pub mod wire;

pub use error::{Error, Result};
