//! Numerical laboratory for the boundary geometry of the universal
//! Teichmüller space: Liouville measures of geodesic boxes, measured
//! laminations of integrable holomorphic quadratic differentials, affine
//! Teichmüller deformations, and curve-family moduli, together with
//! convergence experiments tying them together.

pub mod config;
pub mod disk;
pub mod error;
pub mod experiments;
pub mod lamination;
pub mod modulus;
pub mod quad_diff;
pub mod quadrature;
pub mod selfcheck;
pub mod teich;

pub use error::{Error, Result};
