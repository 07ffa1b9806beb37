use super::{FemError, QuadratureRule, ReferenceElement, Tabulation};
use crate::meshgen::Mesh;
use crate::{Mat3, Point};

/// Image of a reference point under a cell map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellPoint {
    pub x: Point,
    /// `jac[a][b] = d x_a / d xi_b`.
    pub jac: Mat3,
    pub det: f64,
}

/// Cell map `x(xi) = sum_i node_i phi_i(xi)` and its Jacobian at `point`.
/// Fails when the determinant is not positive.
pub fn cell_geometry(mesh: &Mesh, cell: usize, point: &[f64; 3]) -> Result<CellPoint, FemError> {
    let elem = ReferenceElement::new(mesh.dim(), mesh.degree())?;
    let cp = map_point(mesh, &elem, cell, point);
    if cp.det > 0.0 {
        Ok(cp)
    } else {
        Err(FemError::InvertedCell { cell, det: cp.det })
    }
}

pub(crate) fn map_point(mesh: &Mesh, elem: &ReferenceElement, cell: usize, point: &[f64; 3]) -> CellPoint {
    let (values, grads) = elem.shape_eval(point);
    map_from_basis(mesh, cell, &values, &grads)
}

fn map_from_basis(mesh: &Mesh, cell: usize, values: &[f64], grads: &[[f64; 3]]) -> CellPoint {
    let dim = mesh.dim();
    let nodes = mesh.nodes();
    let mut x = [0.0; 3];
    let mut jac = [[0.0; 3]; 3];
    for (i, &n) in mesh.cell_nodes(cell).iter().enumerate() {
        let p = nodes[n];
        for a in 0..dim {
            x[a] += p[a] * values[i];
            for b in 0..dim {
                jac[a][b] += p[a] * grads[i][b];
            }
        }
    }
    CellPoint { x, jac, det: det(&jac, dim) }
}

pub(crate) fn det(m: &Mat3, dim: usize) -> f64 {
    match dim {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
    }
}

pub(crate) fn inverse(m: &Mat3, d: f64, dim: usize) -> Mat3 {
    let mut inv = [[0.0; 3]; 3];
    match dim {
        1 => inv[0][0] = 1.0 / d,
        2 => {
            inv[0][0] = m[1][1] / d;
            inv[0][1] = -m[0][1] / d;
            inv[1][0] = -m[1][0] / d;
            inv[1][1] = m[0][0] / d;
        }
        _ => {
            for i in 0..3 {
                for j in 0..3 {
                    // cofactor of (j, i)
                    let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                    let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                    inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / d;
                }
            }
        }
    }
    inv
}

/// Per-cell quadrature data: physical points, `det J * w`, and physical
/// basis gradients `J^{-T} grad_ref`.
#[derive(Debug, Clone)]
pub struct CellValues {
    pub x: Vec<Point>,
    pub jxw: Vec<f64>,
    pub grads: Vec<Vec<[f64; 3]>>,
}

pub(crate) fn cell_values(
    mesh: &Mesh,
    tab: &Tabulation,
    rule: &QuadratureRule,
    cell: usize,
) -> Result<CellValues, FemError> {
    let dim = mesh.dim();
    let nq = rule.len();
    let mut out = CellValues { x: Vec::with_capacity(nq), jxw: Vec::with_capacity(nq), grads: Vec::with_capacity(nq) };
    for q in 0..nq {
        let cp = map_from_basis(mesh, cell, &tab.values[q], &tab.grads[q]);
        if !(cp.det > 0.0) {
            return Err(FemError::InvertedCell { cell, det: cp.det });
        }
        let inv = inverse(&cp.jac, cp.det, dim);
        let g: Vec<[f64; 3]> = tab.grads[q]
            .iter()
            .map(|gr| {
                let mut gp = [0.0; 3];
                for (a, gpa) in gp.iter_mut().enumerate().take(dim) {
                    for b in 0..dim {
                        *gpa += inv[b][a] * gr[b];
                    }
                }
                gp
            })
            .collect();
        out.x.push(cp.x);
        out.jxw.push(cp.det * rule.weights()[q]);
        out.grads.push(g);
    }
    Ok(out)
}
