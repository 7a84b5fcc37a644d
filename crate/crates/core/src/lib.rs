//! Numerical tools for elliptic Weingarten surfaces.

pub mod error;
pub mod diagram;
pub mod function;
pub mod geometry;
pub mod jets;
pub mod linop;
pub mod mesh;
pub mod patch;
pub mod relation;
pub mod solver;

pub use error::{Error, Result};
