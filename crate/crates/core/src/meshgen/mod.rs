//! Curved quadrilateral (2D) and hexahedral (3D) meshes of perturbed balls.
//!
//! Cells store their nodes in lexicographic order of the reference points
//! `{0, 1/r, .., 1}^dim` (first coordinate fastest), the same order as the
//! tensor Lagrange basis in [`crate::fem::ReferenceElement`]. Local face
//! `2 a + s` is the reference face `xi_a = s`.

mod build;
mod io;
mod layout;

pub use build::{build_mesh, coarse_mesh, elevate_to_isoparametric, refine_uniform};
pub use io::{read_mesh_text, write_mesh_text, write_vtk, VtkField};

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::fem::{map_point, QuadratureRule, ReferenceElement};
use crate::geometry::{GeometryError, PerturbedDomain};
use crate::Point;

/// Marker carried by faces on the outer (curved) boundary.
pub const OUTER_BOUNDARY: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("non-positive Jacobian determinant in {} cell(s) {cells:?} (min det {min_det:e})", cells.len())]
    InvertedCells { cells: Vec<usize>, min_det: f64 },
    #[error("unsupported mesh degree {0}")]
    Degree(usize),
    #[error("inconsistent mesh: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundaryFace {
    pub cell: usize,
    pub local_face: usize,
    pub marker: u32,
}

/// Position of a cell inside one block of the ball layout, in block-local
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Block {
    pub patch: usize,
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    degree: usize,
    level: usize,
    nodes: Vec<Point>,
    cells: Vec<usize>,
    boundary_faces: Vec<BoundaryFace>,
    h_max: f64,
    blocks: Option<Vec<Block>>,
    domain: Option<PerturbedDomain>,
}

impl Mesh {
    /// Builds a mesh from raw data. Such meshes have straight-sided
    /// refinement and elevation (no curved boundary description).
    pub fn from_parts(
        dim: usize,
        degree: usize,
        nodes: Vec<Point>,
        cells: Vec<Vec<usize>>,
        boundary_faces: Vec<BoundaryFace>,
    ) -> Result<Self, MeshError> {
        if dim != 2 && dim != 3 {
            return Err(MeshError::Inconsistent(format!("dimension {dim}")));
        }
        if !(1..=2).contains(&degree) {
            return Err(MeshError::Degree(degree));
        }
        let npc = (degree + 1).pow(dim as u32);
        let mut flat = Vec::with_capacity(cells.len() * npc);
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() != npc {
                return Err(MeshError::Inconsistent(format!("cell {c} has {} nodes, expected {npc}", cell.len())));
            }
            if let Some(&n) = cell.iter().find(|&&n| n >= nodes.len()) {
                return Err(MeshError::Inconsistent(format!("cell {c} references missing node {n}")));
            }
            flat.extend_from_slice(cell);
        }
        for f in &boundary_faces {
            if f.cell >= cells.len() || f.local_face >= 2 * dim {
                return Err(MeshError::Inconsistent(format!("bad boundary face {f:?}")));
            }
        }
        let mut mesh = Self {
            dim,
            degree,
            level: 0,
            nodes,
            cells: flat,
            boundary_faces,
            h_max: 0.0,
            blocks: None,
            domain: None,
        };
        mesh.h_max = mesh.compute_h_max();
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len() / self.nodes_per_cell()
    }

    pub fn nodes_per_cell(&self) -> usize {
        (self.degree + 1).pow(self.dim as u32)
    }

    pub fn cell_nodes(&self, cell: usize) -> &[usize] {
        let n = self.nodes_per_cell();
        &self.cells[cell * n..(cell + 1) * n]
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.boundary_faces
    }

    /// Largest corner-to-corner cell diameter.
    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    /// The domain this mesh was generated for, if any.
    pub fn domain(&self) -> Option<&PerturbedDomain> {
        self.domain.as_ref()
    }

    /// Positions in the cell node list of the `2^dim` vertices, in
    /// lexicographic order.
    pub fn corner_slots(&self) -> Vec<usize> {
        corner_slots(self.dim, self.degree)
    }

    pub fn cell_corners(&self, cell: usize) -> Vec<Point> {
        let nodes = self.cell_nodes(cell);
        self.corner_slots().iter().map(|&s| self.nodes[nodes[s]]).collect()
    }

    /// Corner-to-corner diameter of one cell.
    pub fn cell_diameter(&self, cell: usize) -> f64 {
        let corners = self.cell_corners(cell);
        let mut d = 0.0f64;
        for i in 0..corners.len() {
            for j in (i + 1)..corners.len() {
                let (a, b) = (corners[i], corners[j]);
                d = d.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt());
            }
        }
        d
    }

    fn compute_h_max(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_diameter(c)).fold(0.0, f64::max)
    }

    /// Slots of the cell node list lying on local face `face`.
    pub fn face_slots(&self, face: usize) -> Vec<usize> {
        let (axis, side) = (face / 2, face % 2);
        let k = self.degree + 1;
        (0..self.nodes_per_cell())
            .filter(|&i| (i / k.pow(axis as u32)) % k == side * self.degree)
            .collect()
    }

    /// `true` for every node on a boundary face.
    pub fn boundary_node_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.nodes.len()];
        let slots: Vec<Vec<usize>> = (0..2 * self.dim).map(|f| self.face_slots(f)).collect();
        for f in &self.boundary_faces {
            let nodes = self.cell_nodes(f.cell);
            for &s in &slots[f.local_face] {
                mask[nodes[s]] = true;
            }
        }
        mask
    }

    /// Checks that every face is shared by exactly two cells, or by one cell
    /// when it is listed as a boundary face.
    pub fn check_watertight(&self) -> Result<(), MeshError> {
        let corner_slots = self.corner_slots();
        let mut count: HashMap<Vec<usize>, usize> = HashMap::new();
        let key_of = |cell: usize, face: usize| -> Vec<usize> {
            let nodes = self.cell_nodes(cell);
            let (axis, side) = (face / 2, face % 2);
            let mut k: Vec<usize> = corner_slots
                .iter()
                .enumerate()
                .filter(|(c, _)| (c >> axis) & 1 == side)
                .map(|(_, &s)| nodes[s])
                .collect();
            k.sort_unstable();
            k
        };
        let mut keys = Vec::new();
        for c in 0..self.n_cells() {
            for f in 0..2 * self.dim {
                let k = key_of(c, f);
                *count.entry(k.clone()).or_default() += 1;
                keys.push(((c, f), k));
            }
        }
        let boundary: HashMap<(usize, usize), ()> =
            self.boundary_faces.iter().map(|f| ((f.cell, f.local_face), ())).collect();
        for ((c, f), k) in keys {
            let n = count[&k];
            let is_boundary = boundary.contains_key(&(c, f));
            let expected = if is_boundary { 1 } else { 2 };
            if n != expected {
                return Err(MeshError::Inconsistent(format!(
                    "face {f} of cell {c} shared by {n} cell(s), expected {expected}"
                )));
            }
        }
        Ok(())
    }

    /// Verifies `det J > 0` at the points of the default quadrature rule
    /// (order `2r + 1`) of every cell.
    pub fn check_jacobians(&self) -> Result<(), MeshError> {
        let elem = ReferenceElement::new(self.dim, self.degree).map_err(|e| MeshError::Inconsistent(e.to_string()))?;
        let rule = QuadratureRule::gauss(self.dim, 2 * self.degree + 1);
        let bad: Vec<(usize, f64)> = (0..self.n_cells())
            .into_par_iter()
            .filter_map(|c| {
                let min = rule
                    .points()
                    .iter()
                    .map(|p| map_point(self, &elem, c, p).det)
                    .fold(f64::INFINITY, f64::min);
                (min <= 0.0 || !min.is_finite()).then_some((c, min))
            })
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            let min_det = bad.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
            Err(MeshError::InvertedCells { cells: bad.into_iter().map(|b| b.0).collect(), min_det })
        }
    }

    /// Largest distance between the discrete boundary and the boundary of
    /// `domain`, measured radially at `samples + 1` points per face
    /// direction: `max | |x| - rho(angle(x)) |`.
    pub fn boundary_defect(&self, domain: &PerturbedDomain, samples: usize) -> f64 {
        let elem = ReferenceElement::new(self.dim, self.degree).expect("mesh degree is valid");
        let s = samples.max(1);
        self.boundary_faces
            .par_iter()
            .map(|f| {
                let (axis, side) = (f.local_face / 2, f.local_face % 2);
                let free: Vec<usize> = (0..self.dim).filter(|&a| a != axis).collect();
                let npts = (s + 1).pow(free.len() as u32);
                let mut worst = 0.0f64;
                for k in 0..npts {
                    let mut xi = [0.0; 3];
                    xi[axis] = side as f64;
                    let mut rem = k;
                    for &a in &free {
                        xi[a] = (rem % (s + 1)) as f64 / s as f64;
                        rem /= s + 1;
                    }
                    let x = map_point(self, &elem, f.cell, &xi).x;
                    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                    worst = worst.max((r - domain.radius_towards(&x)).abs());
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Total measure `sum_cells int det J` computed with an order-`order`
    /// rule.
    pub fn measure(&self, order: usize) -> f64 {
        let elem = ReferenceElement::new(self.dim, self.degree).expect("mesh degree is valid");
        let rule = QuadratureRule::gauss(self.dim, order);
        (0..self.n_cells())
            .into_par_iter()
            .map(|c| {
                rule.points()
                    .iter()
                    .zip(rule.weights())
                    .map(|(p, w)| w * map_point(self, &elem, c, p).det)
                    .sum::<f64>()
            })
            .sum()
    }
}

pub(crate) fn corner_slots(dim: usize, degree: usize) -> Vec<usize> {
    let k = degree + 1;
    (0..(1usize << dim))
        .map(|c| (0..dim).map(|a| ((c >> a) & 1) * degree * k.pow(a as u32)).sum())
        .collect()
}
