//! Simulation toolkit for fast soliton collisions on the 1-D nonlinear
//! Schroedinger equation, with spectrally filtered photon-number detection
//! and semiclassical noise ensembles.

pub mod collision;
pub mod error;
pub mod field;
pub mod grid;
pub mod nlse;
pub mod qnd;
pub mod stats;
pub mod units;

pub use error::{SolqError, SolqResult};
pub use field::{Band, Envelope, Spectrum};
pub use grid::Grid;
pub use units::PhysicalMap;
