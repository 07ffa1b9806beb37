use rayon::prelude::*;

use super::{cell_values, FeSpace, FemError, FieldType, QuadratureRule};
use crate::linalg::{cg_solve, direct_solve, relative_residual, CgOutcome, CsrMatrix, Triplet};
use crate::Point;

/// Sparse matrix with its right-hand side.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

impl LinearSystem {
    pub fn ndofs(&self) -> usize {
        self.rhs.len()
    }

    /// Symmetric elimination of the DOFs flagged in `mask` with prescribed
    /// `values`: constrained rows and columns become identity rows and the
    /// coupling is moved to the right-hand side.
    pub fn apply_dirichlet(&mut self, mask: &[bool], values: &[f64]) -> Result<(), FemError> {
        let n = self.ndofs();
        if mask.len() != n || values.len() != n {
            return Err(FemError::Parameter(format!(
                "constraint arrays of length {}/{} for {n} DOFs",
                mask.len(),
                values.len()
            )));
        }
        for i in 0..n {
            let (cols, vals) = self.matrix.row_mut(i);
            if mask[i] {
                let mut has_diag = false;
                for (&c, v) in cols.iter().zip(vals.iter_mut()) {
                    if c == i {
                        *v = 1.0;
                        has_diag = true;
                    } else {
                        *v = 0.0;
                    }
                }
                if !has_diag {
                    return Err(FemError::Parameter(format!("row {i} has no diagonal entry")));
                }
                self.rhs[i] = values[i];
            } else {
                for (&c, v) in cols.iter().zip(vals.iter_mut()) {
                    if mask[c] {
                        self.rhs[i] -= *v * values[c];
                        *v = 0.0;
                    }
                }
            }
        }
        Ok(())
    }
}

struct Local {
    dofs: Vec<usize>,
    matrix: Vec<f64>,
    rhs: Vec<f64>,
}

fn gather(space: &FeSpace<'_>, locals: Vec<Local>) -> Result<LinearSystem, FemError> {
    let n = space.ndofs();
    let mut triplets = Vec::with_capacity(locals.iter().map(|l| l.matrix.len()).sum());
    let mut rhs = vec![0.0; n];
    for l in &locals {
        let m = l.dofs.len();
        for (a, &i) in l.dofs.iter().enumerate() {
            rhs[i] += l.rhs[a];
            for (b, &j) in l.dofs.iter().enumerate() {
                triplets.push(Triplet::new(i, j, l.matrix[a * m + b]));
            }
        }
    }
    Ok(LinearSystem { matrix: CsrMatrix::from_triplets(n, n, &triplets)?, rhs })
}

fn check_order(space: &FeSpace<'_>, quad_order: usize) -> Result<(), FemError> {
    let min = 2 * space.degree() + 1;
    if quad_order < min {
        return Err(FemError::Parameter(format!("quadrature order {quad_order} below {min}")));
    }
    Ok(())
}

/// Stiffness matrix and load vector of `-Δu = f` without boundary
/// conditions.
pub fn assemble_laplace_unconstrained(
    space: &FeSpace<'_>,
    f: impl Fn(&Point) -> f64 + Sync,
    quad_order: usize,
) -> Result<LinearSystem, FemError> {
    if space.field() != FieldType::Scalar {
        return Err(FemError::Unsupported("Laplace assembly needs a scalar space".into()));
    }
    check_order(space, quad_order)?;
    let mesh = space.mesh();
    let rule = QuadratureRule::gauss(mesh.dim(), quad_order);
    let tab = space.element().tabulate(&rule);
    let nb = space.element().n_basis();
    let locals = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let cv = cell_values(mesh, &tab, &rule, c)?;
            let mut matrix = vec![0.0; nb * nb];
            let mut rhs = vec![0.0; nb];
            for q in 0..rule.len() {
                let g = &cv.grads[q];
                let fx = f(&cv.x[q]) * cv.jxw[q];
                for i in 0..nb {
                    rhs[i] += fx * tab.values[q][i];
                    for j in i..nb {
                        let v = (g[i][0] * g[j][0] + g[i][1] * g[j][1] + g[i][2] * g[j][2]) * cv.jxw[q];
                        matrix[i * nb + j] += v;
                    }
                }
            }
            for i in 0..nb {
                for j in 0..i {
                    matrix[i * nb + j] = matrix[j * nb + i];
                }
            }
            Ok(Local { dofs: space.cell_dofs(c), matrix, rhs })
        })
        .collect::<Result<Vec<_>, FemError>>()?;
    gather(space, locals)
}

/// Laplace system with homogeneous Dirichlet conditions on the boundary
/// DOFs of `space`.
pub fn assemble_laplace(
    space: &FeSpace<'_>,
    f: impl Fn(&Point) -> f64 + Sync,
    quad_order: usize,
) -> Result<LinearSystem, FemError> {
    let mut sys = assemble_laplace_unconstrained(space, f, quad_order)?;
    sys.apply_dirichlet(space.dirichlet_mask(), &vec![0.0; space.ndofs()])?;
    Ok(sys)
}

/// Equal-order Stokes block system `[A B^T; B -S]` with local projection
/// stabilization, before boundary conditions.
///
/// `B_{q,v} = -(q, div v)` and
/// `S_T = delta_T (grad p - pi_T grad p, grad q - pi_T grad q)_T` with
/// `pi_T` the cell mean and `delta_T = alpha h_T^2`.
pub fn assemble_stokes_lps_unconstrained(
    space: &FeSpace<'_>,
    f: impl Fn(&Point) -> [f64; 2] + Sync,
    alpha: f64,
    quad_order: usize,
) -> Result<LinearSystem, FemError> {
    let mesh = space.mesh();
    if mesh.dim() != 2 {
        return Err(FemError::Unsupported(format!("Stokes in {} dimensions", mesh.dim())));
    }
    if space.field() != FieldType::VelocityPressure {
        return Err(FemError::Unsupported("Stokes assembly needs a velocity-pressure space".into()));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(FemError::Parameter(format!("LPS parameter must be positive, got {alpha}")));
    }
    check_order(space, quad_order)?;
    let rule = QuadratureRule::gauss(2, quad_order);
    let tab = space.element().tabulate(&rule);
    let nb = space.element().n_basis();
    let m = 3 * nb;
    let locals = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let cv = cell_values(mesh, &tab, &rule, c)?;
            let delta = alpha * mesh.cell_diameter(c).powi(2);
            let mut matrix = vec![0.0; m * m];
            let mut rhs = vec![0.0; m];
            let mut stiff = vec![0.0; nb * nb];
            let mut mean_grad = vec![[0.0; 2]; nb];
            let mut area = 0.0;
            for q in 0..rule.len() {
                let g = &cv.grads[q];
                let w = cv.jxw[q];
                let phi = &tab.values[q];
                let fx = f(&cv.x[q]);
                area += w;
                for i in 0..nb {
                    rhs[3 * i] += fx[0] * phi[i] * w;
                    rhs[3 * i + 1] += fx[1] * phi[i] * w;
                    mean_grad[i][0] += g[i][0] * w;
                    mean_grad[i][1] += g[i][1] * w;
                    for j in 0..nb {
                        stiff[i * nb + j] += (g[i][0] * g[j][0] + g[i][1] * g[j][1]) * w;
                        // pressure row i against velocity column (j, comp)
                        for comp in 0..2 {
                            let b = -phi[i] * g[j][comp] * w;
                            matrix[(3 * i + 2) * m + 3 * j + comp] += b;
                            matrix[(3 * j + comp) * m + 3 * i + 2] += b;
                        }
                    }
                }
            }
            for i in 0..nb {
                for j in 0..nb {
                    let a = stiff[i * nb + j];
                    matrix[(3 * i) * m + 3 * j] += a;
                    matrix[(3 * i + 1) * m + 3 * j + 1] += a;
                    let proj = (mean_grad[i][0] * mean_grad[j][0] + mean_grad[i][1] * mean_grad[j][1]) / area;
                    matrix[(3 * i + 2) * m + 3 * j + 2] -= delta * (a - proj);
                }
            }
            Ok(Local { dofs: space.cell_dofs(c), matrix, rhs })
        })
        .collect::<Result<Vec<_>, FemError>>()?;
    gather(space, locals)
}

/// Stabilized Stokes system with homogeneous velocity Dirichlet conditions.
pub fn assemble_stokes_lps(
    space: &FeSpace<'_>,
    f: impl Fn(&Point) -> [f64; 2] + Sync,
    alpha: f64,
    quad_order: usize,
) -> Result<LinearSystem, FemError> {
    let mut sys = assemble_stokes_lps_unconstrained(space, f, alpha, quad_order)?;
    sys.apply_dirichlet(space.dirichlet_mask(), &vec![0.0; space.ndofs()])?;
    Ok(sys)
}

/// Jacobi-preconditioned CG with relative tolerance `1e-12` and at most
/// `10 n` iterations.
pub fn solve_laplace(system: &LinearSystem) -> Result<CgOutcome, FemError> {
    let n = system.ndofs();
    Ok(cg_solve(&system.matrix, &system.rhs, 1e-12, (10 * n).max(10))?)
}

#[derive(Debug, Clone)]
pub struct StokesSolution {
    pub coeffs: Vec<f64>,
    /// Relative residual of the gauge-fixed system.
    pub residual: f64,
}

/// Direct solve of a stabilized Stokes system.
///
/// The pressure is determined up to a constant, so one pressure DOF is
/// fixed to zero for the factorization and the discrete mean of the
/// pressure over the mesh is removed afterwards.
pub fn solve_stokes(space: &FeSpace<'_>, system: &LinearSystem) -> Result<StokesSolution, FemError> {
    if space.field() != FieldType::VelocityPressure || system.ndofs() != space.ndofs() {
        return Err(FemError::Parameter("system does not belong to a velocity-pressure space".into()));
    }
    let nc = space.n_components();
    let pin = nc - 1;
    let mut gauged = system.clone();
    let mut mask = vec![false; gauged.ndofs()];
    mask[pin] = true;
    gauged.apply_dirichlet(&mask, &vec![0.0; gauged.ndofs()])?;
    let mut coeffs = direct_solve(&gauged.matrix, &gauged.rhs)?;
    let residual = relative_residual(&gauged.matrix, &coeffs, &gauged.rhs);
    let mean = pressure_mean(space, &coeffs, 2 * space.degree() + 1)?;
    for p in coeffs.iter_mut().skip(pin).step_by(nc) {
        *p -= mean;
    }
    Ok(StokesSolution { coeffs, residual })
}

/// `(1/|Ω_h|) ∫ p_h` for the last component of a velocity-pressure vector.
pub fn pressure_mean(space: &FeSpace<'_>, coeffs: &[f64], quad_order: usize) -> Result<f64, FemError> {
    let mesh = space.mesh();
    let nc = space.n_components();
    let rule = QuadratureRule::gauss(mesh.dim(), quad_order);
    let tab = space.element().tabulate(&rule);
    let (int, vol) = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let cv = cell_values(mesh, &tab, &rule, c)?;
            let nodes = mesh.cell_nodes(c);
            let mut acc = (0.0, 0.0);
            for q in 0..rule.len() {
                let p: f64 = nodes.iter().enumerate().map(|(i, &n)| coeffs[n * nc + nc - 1] * tab.values[q][i]).sum();
                acc.0 += p * cv.jxw[q];
                acc.1 += cv.jxw[q];
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>, FemError>>()?
        .into_iter()
        .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(int / vol)
}
