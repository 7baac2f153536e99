//! Anisotropic α-stable operators, perimeters, heat contents and functional
//! inequalities on periodic grids.

pub mod cli;
pub mod densities;
pub mod error;
pub mod geometry;
pub mod quad;
pub mod spectral_engine;
pub mod optimizer;
pub mod stable_model;
pub mod verifier;

pub use error::{Error, Result};
pub use spectral_engine::{Grid, GridField, NormSpec, SpectralEngine, VectorField};
pub use stable_model::{SpectralMeasure, StableModel};
