use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet as FaerTriplet};
use faer::Mat;

use super::{norm2, CsrMatrix, LinalgError};

/// Sparse LU factorization with fill-reducing ordering and partial pivoting.
///
/// Works for the symmetric indefinite saddle-point systems where CG is not
/// applicable. Fails with [`LinalgError::Singular`] when a pivot breaks down
/// or the computed solution is not finite.
pub fn direct_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(LinalgError::Dimension(format!(
            "matrix {}x{} with right-hand side of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let triplets: Vec<_> = a.to_triplets().map(|t| FaerTriplet::new(t.row, t.col, t.value)).collect();
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| LinalgError::Dimension(format!("{e:?}")))?;
    let lu = mat.sp_lu().map_err(|e| LinalgError::Singular(format!("{e:?}")))?;

    let mut rhs = Mat::<f64>::zeros(n, 1);
    for (i, &v) in b.iter().enumerate() {
        rhs[(i, 0)] = v;
    }
    lu.solve_in_place(rhs.as_mut());
    let x: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::Singular("zero pivot produced a non-finite solution".into()));
    }
    Ok(x)
}

/// `||b - A x|| / ||b||`, or the absolute residual when `b = 0`.
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r: Vec<f64> = ax.iter().zip(b).map(|(u, v)| v - u).collect();
    let bn = norm2(b);
    if bn > 0.0 {
        norm2(&r) / bn
    } else {
        norm2(&r)
    }
}
