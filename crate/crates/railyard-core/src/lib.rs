//! Dimer coverings of rail-yard graphs with free boundary conditions.
//!
//! Coverings are encoded as sequences of interlacing partitions. The crate
//! provides exact partition functions and a brute-force enumerator, a perfect
//! sampler built from local bijections, and the scaling-limit numerics
//! (density of the limit shape and its frozen boundary).

pub mod asymptotics;
pub mod error;
pub mod partitions;
pub mod railyard;
pub mod sampler;
pub mod scalar;
pub mod zfunction;

pub use asymptotics::{AsymptoticParams, RationalFunction};
pub use error::{Error, Result};
pub use partitions::{interlaces_h, interlaces_v, Partition, Strip};
pub use railyard::{CoveringState, GraphConfig, RailYardGraph, Side, Sign};
pub use scalar::{Rational, Scalar};
