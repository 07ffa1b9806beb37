//! Tensor Lagrange elements on quadrilaterals and hexahedra, iso-parametric
//! cell maps, and assembly of the Laplace and stabilized Stokes systems.

mod assembly;
mod mapping;
mod reference;
mod rule;
mod space;

pub use assembly::{
    assemble_laplace, assemble_laplace_unconstrained, assemble_stokes_lps, assemble_stokes_lps_unconstrained, pressure_mean,
    solve_laplace, solve_stokes, LinearSystem, StokesSolution,
};
pub use mapping::{cell_geometry, CellPoint, CellValues};
pub use reference::{ReferenceElement, Tabulation};
pub use rule::QuadratureRule;
pub use space::{interpolate, FeSpace, FieldType};

pub(crate) use mapping::{cell_values, map_point};

use thiserror::Error;

use crate::linalg::LinalgError;
use crate::meshgen::MeshError;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("inverted cell {cell} (det J = {det:e})")]
    InvertedCell { cell: usize, det: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}
