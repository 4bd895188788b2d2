//! Center-boundary object representations and a network-free multi-object
//! reasoning engine for unsupervised object discovery.
//!
//! The crate builds three per-crop fields from instance masks (an existence
//! score, a unit center field and a separately normalized boundary distance
//! field), serves them through a [`provider::FieldProvider`], and turns them
//! into object detections by iteratively refining box proposals.

pub mod cbf;
pub mod cli;
pub mod edt;
pub mod error;
pub mod eval;
pub mod fields;
pub mod grid;
pub mod io;
pub mod labels;
pub mod provider;
pub mod reasoning;
pub mod render;
pub mod resize;
pub mod synth;

pub use error::{Error, Result};
pub use grid::{BinaryMask, Grid, PixelBox, ScalarField, VectorField};
