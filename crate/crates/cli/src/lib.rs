//! Command-line front end for `tower-dimers`: run configuration, the
//! verification harness, and SVG/CSV output.

pub mod config;
pub mod render;
pub mod table;
pub mod verify;
