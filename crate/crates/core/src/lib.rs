//! Universal high-temperature Casimir interaction between two spheres (or a
//! sphere and a plane) in an electrolyte.
//!
//! Three routes to the dimensionless free energy `f_u` are provided and
//! cross-checked against each other:
//!
//! * [`scattering`]: the exact `-Tr log(1 - M) / 2` by Nyström discretization,
//! * [`analytic`]: the single round trip in closed form with its limits,
//! * [`analytic::free_energy_approx`]: the single round trip times a fitted
//!   rational correction (see [`fitting`]).

pub mod analytic;
pub mod banded;
pub mod bessel;
pub mod cli;
pub mod error;
pub mod evaluate;
pub mod fitting;
pub mod geometry;
pub mod physical;
pub mod quadrature;
pub mod scattering;

pub use error::{Error, Result};
