//! Simulation of microwave-driven, optically pumped polarization transfer
//! from an NV-center electron spin to a hyperfine-coupled ¹³C nucleus.
//!
//! Units throughout: frequencies in MHz, fields in mT, times in µs.

#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod hamiltonian;
pub mod linalg;
pub mod lindblad;
pub mod run;
pub mod spin_ops;

pub use diagnostics::{Flagged, Warning};
pub use error::{Error, Result};
