//! Galerkin assembly of the Helmholtz boundary integral operators.

mod duality;
pub mod gauss;
pub mod kernel;
mod operators;
mod potential;
pub mod quadrature;
mod rhs;

pub use duality::{assemble_duality, GramMatrix};
pub use kernel::{double_layer_kernel, greens, greens_r, KernelConfig};
pub use operators::{
    assemble_hypersingular, assemble_single_layer, matrix_csv, parse_matrix_csv, Form, GalerkinMatrix, SpaceTag,
};
pub use potential::{eval_potential, Layer};
pub use quadrature::{classify_pair, sauter_schwab_integral, PairClass, PairMoments, QuadratureConfig};
pub use rhs::{assemble_rhs, plane_wave, plane_wave_traces, IncidentWave};
