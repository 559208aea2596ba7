//! Radial SLE in circular slit disks: the Komatu-Loewner flow, the Schiffer
//! moduli flow and the Schiffer diffusion, with trace extraction, oracles and
//! statistical experiments.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod loewner;
pub mod potential;
pub mod schiffer;
pub mod sde;

pub use error::{Error, Result};
