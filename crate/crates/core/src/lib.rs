//! Arithmetic random waves on the 2- and 3-torus: frequency sets, lattice
//! correlations, the Wiener-chaos expansion of the nodal volume, field
//! synthesis on grids and geometric nodal estimators.

pub mod chaos;
pub mod correlations;
pub mod error;
pub mod experiment;
pub mod field;
pub mod lattice;
pub mod nodal;
pub mod numeric;
pub mod quadrature;
pub mod stats;

pub use error::{Error, Result};
