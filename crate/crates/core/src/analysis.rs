//! Manufactured solutions, error norms on truncated domains and
//! convergence-rate extraction.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fem::{cell_values, map_point, FeSpace, FemError, FieldType, QuadratureRule, Tabulation};
use crate::Point;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("records mix parameter groups: {0}")]
    MixedGroups(String),
    #[error("levels must be strictly increasing, got {0:?}")]
    Levels(Vec<usize>),
    #[error("need at least {min} points, got {got}")]
    TooFewPoints { min: usize, got: usize },
    #[error("non-positive value {0} in log-log fit")]
    NonPositive(f64),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Fem(#[from] FemError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Laplace2d,
    Laplace3d,
    Stokes2d,
}

impl ProblemKind {
    pub fn dim(self) -> usize {
        match self {
            ProblemKind::Laplace3d => 3,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Laplace2d => "laplace2d",
            ProblemKind::Laplace3d => "laplace3d",
            ProblemKind::Stokes2d => "stokes2d",
        }
    }

    pub fn is_stokes(self) -> bool {
        self == ProblemKind::Stokes2d
    }

    pub fn field(self) -> FieldType {
        if self.is_stokes() {
            FieldType::VelocityPressure
        } else {
            FieldType::Scalar
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "laplace2d" => Ok(ProblemKind::Laplace2d),
            "laplace3d" => Ok(ProblemKind::Laplace3d),
            "stokes2d" => Ok(ProblemKind::Stokes2d),
            other => Err(AnalysisError::Argument(format!("unknown problem '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceExact {
    pub u: f64,
    pub grad: [f64; 3],
    pub f: f64,
}

/// `u = -cos(pi r / 2)` with `f = -Δu`.
pub fn exact_laplace(dim: usize, x: &Point) -> LaplaceExact {
    let r = (0..dim).map(|a| x[a] * x[a]).sum::<f64>().sqrt();
    let half = 0.5 * PI * r;
    // sin(pi r / 2) / r
    let sinc = if r < 1e-8 { 0.5 * PI } else { half.sin() / r };
    let mut grad = [0.0; 3];
    for a in 0..dim {
        grad[a] = 0.5 * PI * sinc * x[a];
    }
    let f = -0.25 * PI * PI * half.cos() - (dim as f64 - 1.0) * 0.5 * PI * sinc;
    LaplaceExact { u: -half.cos(), grad, f }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesExact {
    pub u: [f64; 2],
    /// `grad_u[a][b] = d u_a / d x_b`.
    pub grad_u: [[f64; 2]; 2],
    pub p: f64,
    pub f: [f64; 2],
}

/// `u = cos(g) (y, -x)`, `p = 4 cos(g) - 8/pi` with `g = pi r^2 / 2`, and
/// `f = -Δu + grad p`. The pressure has zero mean on the unit disk.
pub fn exact_stokes(x: &Point) -> StokesExact {
    let (px, py) = (x[0], x[1]);
    let r2 = px * px + py * py;
    let g = 0.5 * PI * r2;
    let (s, c) = g.sin_cos();
    let u = [py * c, -px * c];
    let grad_u = [[-PI * px * py * s, c - PI * py * py * s], [-c + PI * px * px * s, PI * px * py * s]];
    let f = [
        PI * (py * r2 * PI * c + 4.0 * (py - px) * s),
        PI * (-px * r2 * PI * c - 4.0 * (px + py) * s),
    ];
    StokesExact { u, grad_u, p: 4.0 * c - 8.0 / PI, f }
}

/// Closed-form reference solution of one of the studied problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalyticProblem {
    pub kind: ProblemKind,
}

impl AnalyticProblem {
    pub fn new(kind: ProblemKind) -> Self {
        Self { kind }
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    /// Number of solution components measured by the error norms.
    pub fn n_components(&self) -> usize {
        if self.kind.is_stokes() {
            2
        } else {
            1
        }
    }

    /// Exact solution components and their gradients (rows).
    pub fn solution(&self, x: &Point) -> ([f64; 2], [[f64; 3]; 2]) {
        if self.kind.is_stokes() {
            let e = exact_stokes(x);
            let g = e.grad_u;
            (e.u, [[g[0][0], g[0][1], 0.0], [g[1][0], g[1][1], 0.0]])
        } else {
            let e = exact_laplace(self.dim(), x);
            ([e.u, 0.0], [e.grad, [0.0; 3]])
        }
    }

    pub fn pressure(&self, x: &Point) -> Option<f64> {
        self.kind.is_stokes().then(|| exact_stokes(x).p)
    }

    pub fn scalar_rhs(&self, x: &Point) -> f64 {
        exact_laplace(self.dim(), x).f
    }

    pub fn vector_rhs(&self, x: &Point) -> [f64; 2] {
        exact_stokes(x).f
    }

    /// Value of DOF component `comp` for nodal interpolation.
    pub fn component(&self, x: &Point, comp: usize) -> f64 {
        match (self.kind.is_stokes(), comp) {
            (true, 2) => exact_stokes(x).p,
            (true, c) => exact_stokes(x).u[c],
            (false, _) => exact_laplace(self.dim(), x).u,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub problem: ProblemKind,
    pub degree: usize,
    pub upsilon: f64,
    pub level: usize,
    pub h_max: f64,
    pub ndofs: usize,
    pub truncation_radius: f64,
    pub l2_error: f64,
    /// Full norm `sqrt(l2^2 + semi^2)`.
    pub h1_error: f64,
    pub h1_semi_error: f64,
    pub pressure_l2_error: Option<f64>,
}

/// Subdivision depth for cells cut by the truncation sphere.
const CUT_DEPTH_2D: usize = 6;
const CUT_DEPTH_3D: usize = 3;

enum Side {
    Inside,
    Outside,
    Cut,
}

struct NormContext<'a> {
    space: &'a FeSpace<'a>,
    coeffs: &'a [f64],
    problem: &'a AnalyticProblem,
    radius: f64,
    rule: &'a QuadratureRule,
}

impl NormContext<'_> {
    /// Position of the image of the reference box `lo + [0, size]^dim`
    /// relative to the truncation sphere, from a ball enclosing its corners.
    fn classify(&self, cell: usize, lo: &[f64; 3], size: f64) -> Side {
        let mesh = self.space.mesh();
        let elem = self.space.element();
        let dim = mesh.dim();
        let mut mid = *lo;
        for m in mid.iter_mut().take(dim) {
            *m += 0.5 * size;
        }
        let c = map_point(mesh, elem, cell, &mid).x;
        let mut rho: f64 = 0.0;
        for k in 0..1usize << dim {
            let mut corner = *lo;
            for (a, v) in corner.iter_mut().enumerate().take(dim) {
                *v += size * ((k >> a) & 1) as f64;
            }
            let x = map_point(mesh, elem, cell, &corner).x;
            rho = rho.max((0..dim).map(|a| (x[a] - c[a]).powi(2)).sum::<f64>().sqrt());
        }
        rho *= 1.1;
        let rc = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rc + rho < self.radius {
            Side::Inside
        } else if rc - rho > self.radius {
            Side::Outside
        } else {
            Side::Cut
        }
    }

    fn integrate_box(
        &self,
        cell: usize,
        lo: [f64; 3],
        size: f64,
        depth: usize,
        acc: &mut [f64; 3],
    ) -> Result<(), FemError> {
        let side = self.classify(cell, &lo, size);
        match side {
            Side::Outside => Ok(()),
            Side::Cut if depth > 0 => {
                let dim = self.space.mesh().dim();
                let half = 0.5 * size;
                for k in 0..1usize << dim {
                    let mut sub = lo;
                    for (a, v) in sub.iter_mut().enumerate().take(dim) {
                        *v += half * ((k >> a) & 1) as f64;
                    }
                    self.integrate_box(cell, sub, half, depth - 1, acc)?;
                }
                Ok(())
            }
            _ => {
                let rule = self.rule.restricted(&lo, size);
                let tab = self.space.element().tabulate(&rule);
                self.accumulate(cell, &tab, &rule, acc)
            }
        }
    }

    /// Adds the squared errors at the points of `rule` with `|x| < radius`.
    fn accumulate(
        &self,
        cell: usize,
        tab: &Tabulation,
        rule: &QuadratureRule,
        acc: &mut [f64; 3],
    ) -> Result<(), FemError> {
        let mesh = self.space.mesh();
        let dim = mesh.dim();
        let nc = self.space.n_components();
        let cv = cell_values(mesh, tab, rule, cell)?;
        let nodes = mesh.cell_nodes(cell);
        for q in 0..rule.len() {
            let x = &cv.x[q];
            if x.iter().map(|v| v * v).sum::<f64>().sqrt() >= self.radius {
                continue;
            }
            let (u, gu) = self.problem.solution(x);
            for comp in 0..self.problem.n_components() {
                let mut uh = 0.0;
                let mut gh = [0.0; 3];
                for (i, &n) in nodes.iter().enumerate() {
                    let v = self.coeffs[n * nc + comp];
                    uh += v * tab.values[q][i];
                    for a in 0..dim {
                        gh[a] += v * cv.grads[q][i][a];
                    }
                }
                acc[0] += (u[comp] - uh).powi(2) * cv.jxw[q];
                acc[1] += (0..dim).map(|a| (gu[comp][a] - gh[a]).powi(2)).sum::<f64>() * cv.jxw[q];
            }
            if let Some(p) = self.problem.pressure(x) {
                let ph: f64 =
                    nodes.iter().enumerate().map(|(i, &n)| self.coeffs[n * nc + 2] * tab.values[q][i]).sum();
                acc[2] += (p - ph).powi(2) * cv.jxw[q];
            }
        }
        Ok(())
    }
}

/// Errors of `coeffs` against `problem` over the part of the mesh with
/// radius below `truncation_radius`. Cells crossing that sphere are
/// bisected recursively and the indicator is applied per quadrature point
/// on the finest boxes. For Stokes the norms cover the velocity; the
/// pressure error is reported separately.
pub fn error_norms(
    space: &FeSpace<'_>,
    coeffs: &[f64],
    problem: &AnalyticProblem,
    truncation_radius: f64,
    quad_order: usize,
) -> Result<ErrorReport, AnalysisError> {
    let mesh = space.mesh();
    if coeffs.len() != space.ndofs() {
        return Err(AnalysisError::Argument(format!("{} coefficients for {} DOFs", coeffs.len(), space.ndofs())));
    }
    if !(truncation_radius > 0.0 && truncation_radius <= 1.0) {
        return Err(AnalysisError::Argument(format!("truncation radius {truncation_radius} outside (0, 1]")));
    }
    if mesh.dim() != problem.dim() || space.field() != problem.kind.field() {
        return Err(AnalysisError::Argument(format!("space does not match problem {}", problem.kind)));
    }
    let dim = mesh.dim();
    let rule = QuadratureRule::gauss(dim, quad_order);
    let tab = space.element().tabulate(&rule);
    let depth = if dim == 2 { CUT_DEPTH_2D } else { CUT_DEPTH_3D };
    let ctx = NormContext { space, coeffs, problem, radius: truncation_radius, rule: &rule };
    let sums = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let mut acc = [0.0; 3];
            match ctx.classify(c, &[0.0; 3], 1.0) {
                Side::Outside => {}
                Side::Inside => ctx.accumulate(c, &tab, &rule, &mut acc)?,
                Side::Cut => ctx.integrate_box(c, [0.0; 3], 1.0, depth, &mut acc)?,
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>, FemError>>()?
        .into_iter()
        .fold([0.0; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
    let l2 = sums[0].sqrt();
    let semi = sums[1].sqrt();
    Ok(ErrorReport {
        problem: problem.kind,
        degree: space.degree(),
        upsilon: mesh.domain().map_or(0.0, |d| d.upsilon()),
        level: mesh.level(),
        h_max: mesh.h_max(),
        ndofs: space.ndofs(),
        truncation_radius,
        l2_error: l2,
        h1_error: (sums[0] + sums[1]).sqrt(),
        h1_semi_error: semi,
        pressure_l2_error: problem.kind.is_stokes().then(|| sums[2].sqrt()),
    })
}

/// `||div u_h||_{L2(Ω_h)}` of a velocity-pressure vector.
pub fn divergence_l2(space: &FeSpace<'_>, coeffs: &[f64], quad_order: usize) -> Result<f64, AnalysisError> {
    if space.field() != FieldType::VelocityPressure || coeffs.len() != space.ndofs() {
        return Err(AnalysisError::Argument("divergence needs a velocity-pressure vector".into()));
    }
    let mesh = space.mesh();
    let dim = mesh.dim();
    let nc = space.n_components();
    let rule = QuadratureRule::gauss(dim, quad_order);
    let tab = space.element().tabulate(&rule);
    let total: f64 = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let cv = cell_values(mesh, &tab, &rule, c)?;
            let nodes = mesh.cell_nodes(c);
            let mut acc = 0.0;
            for q in 0..rule.len() {
                let div: f64 = nodes
                    .iter()
                    .enumerate()
                    .map(|(i, &n)| (0..dim).map(|a| coeffs[n * nc + a] * cv.grads[q][i][a]).sum::<f64>())
                    .sum();
                acc += div * div * cv.jxw[q];
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>, FemError>>()?
        .into_iter()
        .sum();
    Ok(total.sqrt())
}

/// Flag threshold on a per-level rate.
pub const PLATEAU_RATE: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub level: usize,
    pub h_max: f64,
    pub l2_error: f64,
    pub h1_error: f64,
    /// `log2(e_{L-1} / e_L)`; absent on the first row.
    pub rate_l2: Option<f64>,
    pub rate_h1: Option<f64>,
    pub plateau_l2: bool,
    pub plateau_h1: bool,
}

/// Rates between consecutive levels of one `(problem, degree, Υ)` group.
pub fn convergence_table(records: &[ErrorReport]) -> Result<Vec<ConvergenceRow>, AnalysisError> {
    let Some(first) = records.first() else {
        return Ok(Vec::new());
    };
    for r in records {
        if r.problem != first.problem || r.degree != first.degree || r.upsilon != first.upsilon {
            return Err(AnalysisError::MixedGroups(format!(
                "({}, {}, {}) vs ({}, {}, {})",
                first.problem, first.degree, first.upsilon, r.problem, r.degree, r.upsilon
            )));
        }
    }
    if records.windows(2).any(|w| w[1].level <= w[0].level) {
        return Err(AnalysisError::Levels(records.iter().map(|r| r.level).collect()));
    }
    let rate = |a: f64, b: f64| (a / b).log2();
    Ok(records
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let (rate_l2, rate_h1) = if k == 0 {
                (None, None)
            } else {
                let p = &records[k - 1];
                (Some(rate(p.l2_error, r.l2_error)), Some(rate(p.h1_error, r.h1_error)))
            };
            ConvergenceRow {
                level: r.level,
                h_max: r.h_max,
                l2_error: r.l2_error,
                h1_error: r.h1_error,
                rate_l2,
                rate_h1,
                plateau_l2: rate_l2.is_some_and(|v| v < PLATEAU_RATE),
                plateau_h1: rate_h1.is_some_and(|v| v < PLATEAU_RATE),
            }
        })
        .collect())
}

/// Least-squares slope of `log(error)` against `log(Υ)`.
pub fn upsilon_scaling(points: &[(f64, f64)]) -> Result<f64, AnalysisError> {
    if points.len() < 3 {
        return Err(AnalysisError::TooFewPoints { min: 3, got: points.len() });
    }
    if let Some(&bad) = points.iter().flat_map(|(u, e)| [u, e]).find(|v| !(**v > 0.0)) {
        return Err(AnalysisError::NonPositive(bad));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(AnalysisError::Argument("all Υ values coincide".into()));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::interpolate;
    use crate::geometry::PerturbedDomain;
    use crate::meshgen::build_mesh;
    use crate::quadrature::gauss_legendre_unit;
    use proptest::prelude::*;

    fn laplacian_fd(dim: usize, x: &Point, u: impl Fn(&Point) -> f64) -> f64 {
        let h = 1e-4;
        (0..dim)
            .map(|a| {
                let mut lo = *x;
                let mut hi = *x;
                lo[a] -= h;
                hi[a] += h;
                (u(&hi) - 2.0 * u(x) + u(&lo)) / (h * h)
            })
            .sum()
    }

    #[test]
    fn laplace_values_at_origin_and_boundary() {
        let e = exact_laplace(2, &[0.0; 3]);
        assert_eq!(e.u, -1.0);
        assert_eq!(e.grad, [0.0; 3]);
        assert!((e.f + PI * PI / 2.0).abs() < 1e-14);
        let e3 = exact_laplace(3, &[0.0; 3]);
        assert!((e3.f + 0.75 * PI * PI).abs() < 1e-14);
        assert!(exact_laplace(2, &[0.6, 0.8, 0.0]).u.abs() < 1e-15);
        assert!(exact_laplace(3, &[0.0, 0.6, 0.8]).u.abs() < 1e-15);
    }

    #[test]
    fn laplace_rhs_at_half_radius() {
        let f = exact_laplace(2, &[0.5, 0.0, 0.0]).f;
        let expected = -(PI * (PI / 4.0).sin() + PI * PI / 4.0 * (PI / 4.0).cos());
        assert!((f - expected).abs() < 1e-14);
        assert!((f + 3.9662).abs() < 1e-4);
    }

    #[test]
    fn near_origin_is_continuous() {
        let a = exact_laplace(2, &[1e-9, 0.0, 0.0]).f;
        let b = exact_laplace(2, &[1e-7, 0.0, 0.0]).f;
        assert!((a - b).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn laplace_strong_form(dim in 2usize..=3, x in -0.9f64..0.9, y in -0.9f64..0.9, z in -0.9f64..0.9) {
            let p = [x, y, if dim == 3 { z } else { 0.0 }];
            prop_assume!((p[0]*p[0] + p[1]*p[1] + p[2]*p[2]).sqrt() > 0.05);
            let e = exact_laplace(dim, &p);
            let lap = laplacian_fd(dim, &p, |q| exact_laplace(dim, q).u);
            prop_assert!((-lap - e.f).abs() < 1e-5, "{} vs {}", -lap, e.f);
            for a in 0..dim {
                let h = 1e-6;
                let mut lo = p; let mut hi = p;
                lo[a] -= h; hi[a] += h;
                let fd = (exact_laplace(dim, &hi).u - exact_laplace(dim, &lo).u) / (2.0 * h);
                prop_assert!((fd - e.grad[a]).abs() < 1e-8);
            }
        }

        #[test]
        fn stokes_strong_form(x in -1.2f64..1.2, y in -1.2f64..1.2) {
            let p = [x, y, 0.0];
            let e = exact_stokes(&p);
            let h = 1e-5;
            let shift = |dx: f64, dy: f64| exact_stokes(&[x + dx, y + dy, 0.0]);
            let dp = [(shift(h, 0.0).p - shift(-h, 0.0).p) / (2.0 * h), (shift(0.0, h).p - shift(0.0, -h).p) / (2.0 * h)];
            for c in 0..2 {
                let lap = laplacian_fd(2, &p, |q| exact_stokes(q).u[c]);
                prop_assert!((-lap + dp[c] - e.f[c]).abs() < 1e-4 * (1.0 + e.f[c].abs()));
                for b in 0..2 {
                    let (dx, dy) = if b == 0 { (h, 0.0) } else { (0.0, h) };
                    let fd = (shift(dx, dy).u[c] - shift(-dx, -dy).u[c]) / (2.0 * h);
                    prop_assert!((fd - e.grad_u[c][b]).abs() < 1e-8);
                }
            }
            prop_assert!((e.grad_u[0][0] + e.grad_u[1][1]).abs() < 1e-8);
        }
    }

    #[test]
    fn stokes_reference_sample() {
        let p = [0.3, -0.2, 0.0];
        let e = exact_stokes(&p);
        let h = 1e-5;
        let at = |dx: f64, dy: f64| exact_stokes(&[p[0] + dx, p[1] + dy, 0.0]);
        let dp = [(at(h, 0.0).p - at(-h, 0.0).p) / (2.0 * h), (at(0.0, h).p - at(0.0, -h).p) / (2.0 * h)];
        for c in 0..2 {
            let lap = (at(h, 0.0).u[c] + at(-h, 0.0).u[c] + at(0.0, h).u[c] + at(0.0, -h).u[c] - 4.0 * e.u[c]) / (h * h);
            assert!((-lap + dp[c] - e.f[c]).abs() < 1e-5);
        }
        let div = (at(h, 0.0).u[0] - at(-h, 0.0).u[0] + at(0.0, h).u[1] - at(0.0, -h).u[1]) / (2.0 * h);
        assert!(div.abs() < 1e-8);
        assert_eq!(exact_stokes(&[0.0; 3]).f, [0.0, 0.0]);
        let b = exact_stokes(&[0.8, 0.6, 0.0]);
        assert!(b.u[0].abs() < 1e-15 && b.u[1].abs() < 1e-15);
    }

    #[test]
    fn stokes_pressure_has_zero_disk_mean() {
        let (r, w) = gauss_legendre_unit(30);
        let mean: f64 = r.iter().zip(&w).map(|(ri, wi)| wi * ri * exact_stokes(&[*ri, 0.0, 0.0]).p).sum::<f64>() * 2.0 * PI;
        assert!(mean.abs() < 1e-13);
    }

    #[test]
    fn interpolant_of_zero_has_zero_error() {
        let dom = PerturbedDomain::unit_ball(2).unwrap();
        let mesh = build_mesh(&dom, 2, 1).unwrap();
        let space = FeSpace::new(&mesh, FieldType::Scalar).unwrap();
        let prob = AnalyticProblem::new(ProblemKind::Laplace2d);
        let exact = interpolate(&space, |x, c| prob.component(x, c));
        let rep = error_norms(&space, &exact, &prob, 0.88, 5).unwrap();
        assert!(rep.l2_error > 0.0 && rep.h1_error >= rep.h1_semi_error);
        let zero = vec![0.0; space.ndofs()];
        let rep0 = error_norms(&space, &zero, &prob, 0.88, 5).unwrap();
        // ||u||_{L2(B_0.88)} by radial quadrature
        let (r, w) = gauss_legendre_unit(40);
        let l2: f64 = r
            .iter()
            .zip(&w)
            .map(|(ri, wi)| {
                let s = 0.88 * ri;
                0.88 * wi * s * (0.5 * PI * s).cos().powi(2)
            })
            .sum::<f64>()
            * 2.0
            * PI;
        assert!((rep0.l2_error - l2.sqrt()).abs() < 2e-3 * l2.sqrt());
    }

    #[test]
    fn error_norms_validate_input() {
        let dom = PerturbedDomain::unit_ball(2).unwrap();
        let mesh = build_mesh(&dom, 1, 1).unwrap();
        let space = FeSpace::new(&mesh, FieldType::Scalar).unwrap();
        let prob = AnalyticProblem::new(ProblemKind::Laplace2d);
        let z = vec![0.0; space.ndofs()];
        assert!(error_norms(&space, &z, &prob, 1.5, 5).is_err());
        assert!(error_norms(&space, &z[1..], &prob, 0.88, 5).is_err());
        let p3 = AnalyticProblem::new(ProblemKind::Laplace3d);
        assert!(error_norms(&space, &z, &p3, 0.88, 5).is_err());
    }

    fn report(level: usize, l2: f64, h1: f64) -> ErrorReport {
        ErrorReport {
            problem: ProblemKind::Laplace2d,
            degree: 1,
            upsilon: 0.0,
            level,
            h_max: 1.0 / (1 << level) as f64,
            ndofs: 1,
            truncation_radius: 0.88,
            l2_error: l2,
            h1_error: h1,
            h1_semi_error: h1,
            pressure_l2_error: None,
        }
    }

    #[test]
    fn rates_from_halving_errors() {
        let t = convergence_table(&[report(1, 4.0, 2.0), report(2, 1.0, 1.0), report(3, 0.25, 0.5)]).unwrap();
        assert_eq!(t[0].rate_l2, None);
        assert_eq!(t[1].rate_l2, Some(2.0));
        assert_eq!(t[2].rate_l2, Some(2.0));
        assert_eq!(t[1].rate_h1, Some(1.0));
        assert_eq!(t[2].rate_h1, Some(1.0));
        assert!(!t.iter().any(|r| r.plateau_l2 || r.plateau_h1));
        let flat = convergence_table(&[report(1, 1.0, 1.0), report(2, 0.9, 0.95)]).unwrap();
        assert!(flat[1].plateau_l2 && flat[1].plateau_h1);
    }

    #[test]
    fn table_rejects_bad_groups() {
        let mut other = report(2, 1.0, 1.0);
        other.degree = 2;
        assert!(matches!(convergence_table(&[report(1, 1.0, 1.0), other]), Err(AnalysisError::MixedGroups(_))));
        assert!(matches!(
            convergence_table(&[report(2, 1.0, 1.0), report(2, 0.5, 0.5)]),
            Err(AnalysisError::Levels(_))
        ));
    }

    #[test]
    fn slope_of_linear_data() {
        let pts: Vec<(f64, f64)> = [0.0125, 0.025, 0.05, 0.1].iter().map(|&u| (u, 3.7 * u)).collect();
        assert!((upsilon_scaling(&pts).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(upsilon_scaling(&pts[..2]), Err(AnalysisError::TooFewPoints { .. })));
        assert!(upsilon_scaling(&[(0.0, 1.0), (0.1, 1.0), (0.2, 1.0)]).is_err());
    }
}
