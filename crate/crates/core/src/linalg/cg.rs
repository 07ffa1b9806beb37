use super::{dot, norm2, CsrMatrix, LinalgError};

/// Result of a converged conjugate gradient solve.
#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `||b - A x|| / ||b||`.
    pub residual: f64,
    /// Relative residual after every iteration, starting with the initial one.
    pub residual_history: Vec<f64>,
}

/// Jacobi-preconditioned conjugate gradients for symmetric positive definite
/// `a`, starting from zero. Stops once `||b - A x|| <= rel_tol ||b||`.
pub fn cg_solve(a: &CsrMatrix, b: &[f64], rel_tol: f64, max_iter: usize) -> Result<CgOutcome, LinalgError> {
    pcg(a, b, rel_tol, max_iter, |_| {})
}

pub(crate) fn pcg(
    a: &CsrMatrix,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
    mut on_iterate: impl FnMut(&[f64]),
) -> Result<CgOutcome, LinalgError> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(LinalgError::Dimension(format!(
            "matrix {}x{} with right-hand side of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(LinalgError::Parameter(format!("rel_tol must lie in (0, 1), got {rel_tol}")));
    }
    let inv_diag = a
        .diagonal()
        .into_iter()
        .enumerate()
        .map(|(row, d)| {
            if d > 0.0 {
                Ok(1.0 / d)
            } else {
                Err(LinalgError::BadDiagonal { row, value: d })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut x = vec![0.0; n];
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(CgOutcome { x, iterations: 0, residual: 0.0, residual_history: vec![0.0] });
    }

    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut history = vec![1.0];

    for it in 1..=max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(LinalgError::Singular(format!(
                "non-positive curvature p^T A p = {pap:e} at iteration {it}"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        on_iterate(&x);
        let rel = norm2(&r) / b_norm;
        history.push(rel);
        if rel <= rel_tol {
            return Ok(CgOutcome { x, iterations: it, residual: rel, residual_history: history });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(LinalgError::NotConverged { iterations: max_iter, residual: *history.last().unwrap() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Triplet;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push(Triplet::new(i, i, 2.0));
            if i > 0 {
                t.push(Triplet::new(i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push(Triplet::new(i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn identity_converges_in_one_iteration() {
        let a = CsrMatrix::identity(7);
        let b: Vec<f64> = (0..7).map(|i| i as f64 - 2.5).collect();
        let out = cg_solve(&a, &b, 1e-12, 10).unwrap();
        assert_eq!(out.iterations, 1);
        for (xi, bi) in out.x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-15);
        }
    }

    #[test]
    fn tridiagonal_recovers_ones() {
        let a = laplacian_1d(10);
        let b = a.matvec(&[1.0; 10]);
        let out = cg_solve(&a, &b, 1e-14, 100).unwrap();
        for xi in &out.x {
            assert!((xi - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = laplacian_1d(5);
        let out = cg_solve(&a, &[0.0; 5], 1e-10, 10).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_diagonal() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, -2.0]]);
        assert_eq!(
            cg_solve(&a, &[1.0, 1.0], 1e-8, 10).unwrap_err(),
            LinalgError::BadDiagonal { row: 1, value: -2.0 }
        );
        let a = CsrMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 0.0]]);
        assert!(matches!(cg_solve(&a, &[1.0, 1.0], 1e-8, 10), Err(LinalgError::BadDiagonal { row: 1, .. })));
    }

    #[test]
    fn reports_non_convergence() {
        let a = laplacian_1d(50);
        let b = vec![1.0; 50];
        match cg_solve(&a, &b, 1e-12, 3) {
            Err(LinalgError::NotConverged { iterations: 3, residual }) => assert!(residual > 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn energy_norm_error_is_monotone() {
        let n = 40;
        let a = laplacian_1d(n);
        let exact: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.37).sin()).collect();
        let b = a.matvec(&exact);
        let mut energies = Vec::new();
        pcg(&a, &b, 1e-13, 200, |x| {
            let e: Vec<f64> = x.iter().zip(&exact).map(|(u, v)| u - v).collect();
            energies.push(dot(&e, &a.matvec(&e)).sqrt());
        })
        .unwrap();
        assert!(energies.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-14));
    }
}
