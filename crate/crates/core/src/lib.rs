//! Iso-parametric finite elements on perturbed ball domains.
//!
//! The crate measures how a geometric perturbation of the computational
//! domain (amplitude `upsilon`) interacts with the usual mesh-size driven
//! discretization error. It contains:
//!
//! * [`geometry`]: the radially perturbed unit ball family, sampled Hausdorff
//!   distances and two closed-form geometry-error examples,
//! * [`meshgen`]: curved quadrilateral / hexahedral ball meshes with uniform
//!   refinement and quadratic iso-parametric boundary representation,
//! * [`fem`]: reference elements, quadrature and assembly of the Laplace and
//!   the equal-order stabilized Stokes systems,
//! * [`linalg`]: compressed-row matrices, Jacobi-preconditioned CG and a
//!   sparse direct solver,
//! * [`analysis`]: analytic reference solutions, truncated-domain error norms
//!   and convergence tables,
//! * [`study`]: configuration and orchestration of whole convergence studies
//!   with CSV output.

pub mod analysis;
pub mod fem;
pub mod geometry;
pub mod linalg;
pub mod meshgen;
pub mod quadrature;
pub mod study;

/// Physical point. Two-dimensional points keep `z = 0`.
pub type Point = [f64; 3];

/// Small dense matrix used for Jacobians. Only the leading `dim x dim`
/// block is meaningful.
pub type Mat3 = [[f64; 3]; 3];

pub use analysis::{AnalyticProblem, ErrorReport, ProblemKind};
pub use fem::{FeSpace, FieldType, LinearSystem, QuadratureRule, ReferenceElement};
pub use geometry::{DomainKind, MapDiagnostics, PerturbedDomain};
pub use linalg::CsrMatrix;
pub use meshgen::Mesh;
pub use study::{StudyConfig, StudyRecord};
