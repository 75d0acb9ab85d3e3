//! Weighted lattice paths, banded resolvents and their matrix continued fractions.

pub mod error;
pub mod scalar;
pub mod series;
pub mod band;
pub mod paths;
pub mod registry;
pub mod resolvent;
pub mod mcf;
pub mod pade;
pub mod ensemble;
pub mod testgen;
pub mod verify;

pub use error::{Error, Result};
