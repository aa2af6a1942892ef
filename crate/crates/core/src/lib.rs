//! Eigen-stafs of primitive transition matrices and the objects built from them.

pub mod bundled;
pub mod cocycle;
pub mod error;
pub mod functional;
pub mod leaf;
pub mod regularity;
pub mod sft;
pub mod spectra;
pub mod staf;
pub mod verify;

pub use error::{Error, Result};
