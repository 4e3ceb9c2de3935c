//! Identification of point-like acoustic sources and scatterers from
//! multi-frequency data taken at a few sensors.

pub mod error;
pub mod fixtures;
pub mod forward;
pub mod geometry;
pub mod measurement;
pub mod multi;
pub mod noise;
pub mod point;
pub mod quadrature;
pub mod sampling;
pub mod single;
pub mod specfun;
pub mod spectral;

pub use error::{Error, Result};
pub use point::{Dimension, Point};
