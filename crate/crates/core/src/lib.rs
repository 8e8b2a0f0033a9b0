//! Dimers on square-hexagon tower graphs.

pub mod error;
pub mod interlacing;
pub mod isoradial;
pub mod kasteleyn;
pub mod kernels;
pub mod lattice;
pub mod limitshape;
pub mod numeric;
pub mod shuffle;

pub use error::{Error, Result};
