//! Galerkin boundary elements for Helmholtz scattering at multi-screens.
//!
//! Multi-trace densities live on a product of panel spaces covering the
//! inflated screen. The resulting first-kind systems are singular but
//! consistent and are solved with GMRES, optionally with a block-diagonal
//! Calderón preconditioner built from dual barycentric spaces.

pub mod assembly;
pub mod error;
pub mod excitation;
pub mod geometry;
pub mod par;
pub mod solver;
pub mod spaces;
pub mod vec3;

pub use error::{Error, Result};
