//! Simulation workbench for validating the invariance assumptions behind
//! vision models.
//!
//! The pipeline samples Manhattan-world scenes ([`scenegen`]), renders them
//! with exact ground truth ([`render`]), labels spatial contexts
//! ([`patches`]), evaluates criterion measures ([`validators`]) and sweeps
//! them over parameter grids ([`characterize`]).

pub mod characterize;
pub mod error;
pub mod io;
pub mod patches;
pub mod presets;
pub mod render;
pub mod rng;
pub mod scenegen;
pub mod validators;

pub use error::{Error, Result};
