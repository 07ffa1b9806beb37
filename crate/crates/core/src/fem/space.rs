use super::{FemError, ReferenceElement};
use crate::meshgen::Mesh;
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldType {
    Scalar,
    /// Equal-order velocity (`dim` components) plus pressure.
    VelocityPressure,
}

/// Iso-parametric nodal space: one DOF per mesh node and component, with
/// the element degree equal to the mesh degree.
///
/// DOFs are node-major: `dof = node * n_components + component`.
#[derive(Debug, Clone)]
pub struct FeSpace<'m> {
    mesh: &'m Mesh,
    field: FieldType,
    element: ReferenceElement,
    dirichlet_mask: Vec<bool>,
}

impl<'m> FeSpace<'m> {
    pub fn new(mesh: &'m Mesh, field: FieldType) -> Result<Self, FemError> {
        let element = ReferenceElement::new(mesh.dim(), mesh.degree())?;
        let ncomp = n_components(field, mesh.dim());
        let on_boundary = mesh.boundary_node_mask();
        let mut dirichlet_mask = vec![false; mesh.n_nodes() * ncomp];
        for (node, _) in on_boundary.iter().enumerate().filter(|(_, &b)| b) {
            let constrained = match field {
                FieldType::Scalar => 1,
                FieldType::VelocityPressure => mesh.dim(),
            };
            for c in 0..constrained {
                dirichlet_mask[node * ncomp + c] = true;
            }
        }
        Ok(Self { mesh, field, element, dirichlet_mask })
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn field(&self) -> FieldType {
        self.field
    }

    pub fn degree(&self) -> usize {
        self.element.degree()
    }

    pub fn element(&self) -> &ReferenceElement {
        &self.element
    }

    pub fn n_components(&self) -> usize {
        n_components(self.field, self.mesh.dim())
    }

    pub fn ndofs(&self) -> usize {
        self.mesh.n_nodes() * self.n_components()
    }

    pub fn dof(&self, node: usize, component: usize) -> usize {
        node * self.n_components() + component
    }

    /// Global DOFs of a cell, local node major.
    pub fn cell_dofs(&self, cell: usize) -> Vec<usize> {
        let nc = self.n_components();
        self.mesh
            .cell_nodes(cell)
            .iter()
            .flat_map(|&n| (0..nc).map(move |c| n * nc + c))
            .collect()
    }

    pub fn dirichlet_mask(&self) -> &[bool] {
        &self.dirichlet_mask
    }

    /// Physical location of the node carrying `dof`.
    pub fn dof_point(&self, dof: usize) -> Point {
        self.mesh.nodes()[dof / self.n_components()]
    }
}

fn n_components(field: FieldType, dim: usize) -> usize {
    match field {
        FieldType::Scalar => 1,
        FieldType::VelocityPressure => dim + 1,
    }
}

/// Nodal interpolant: `g(x, component)` evaluated at every DOF location.
pub fn interpolate(space: &FeSpace<'_>, g: impl Fn(&Point, usize) -> f64) -> Vec<f64> {
    let nc = space.n_components();
    (0..space.ndofs()).map(|d| g(&space.dof_point(d), d % nc)).collect()
}
