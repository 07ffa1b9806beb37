//! The perturbed ball family, sampled Hausdorff distances and closed-form
//! geometry-error examples.
//!
//! In 2D the perturbed boundary is the polar graph
//! `rho(phi) = 1 - u/5 + u sin(8 phi)`; in 3D the spherical graph
//! `rho(theta, phi) = 1 - u/5 + u sin(3 phi) sin(3 theta)`, where `u` is the
//! perturbation amplitude (`upsilon`). Spherical coordinates use the polar
//! angle `theta` measured from the `+z` axis.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::gauss_legendre;
use crate::Point;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension must be 2 or 3, got {0}")]
    Dimension(usize),
    #[error("expected {expected} angle(s) for a {dim}D domain, got {got}")]
    AngleArity { dim: usize, expected: usize, got: usize },
    #[error("invalid perturbation amplitude {0}")]
    Upsilon(f64),
    #[error("domains have different dimensions ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("at least {min} samples per angular direction required, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("quadrature order must be at least 2, got {0}")]
    QuadratureOrder(usize),
    #[error("sample point {0:?} lies outside the closed unit disk")]
    PointOutsideDisk(Point),
    #[error("empty point set")]
    EmptyPointSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    UnitBall,
    RadialPerturbation,
}

/// The unit ball or one of its radial perturbations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbedDomain {
    dim: usize,
    upsilon: f64,
    kind: DomainKind,
}

/// Amplitudes at or above this value make the radius vanish somewhere.
const MAX_UPSILON: f64 = 5.0 / 6.0;

impl PerturbedDomain {
    pub fn unit_ball(dim: usize) -> Result<Self, GeometryError> {
        check_dim(dim)?;
        Ok(Self { dim, upsilon: 0.0, kind: DomainKind::UnitBall })
    }

    /// Radially perturbed ball with amplitude `upsilon` (`0 <= upsilon < 5/6`).
    pub fn radial(dim: usize, upsilon: f64) -> Result<Self, GeometryError> {
        check_dim(dim)?;
        if !upsilon.is_finite() || !(0.0..MAX_UPSILON).contains(&upsilon) {
            return Err(GeometryError::Upsilon(upsilon));
        }
        Ok(Self { dim, upsilon, kind: DomainKind::RadialPerturbation })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn upsilon(&self) -> f64 {
        self.upsilon
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    /// Boundary radius at the given angles: `[phi]` in 2D, `[theta, phi]` in 3D.
    pub fn boundary_radius(&self, angles: &[f64]) -> Result<f64, GeometryError> {
        let expected = self.dim - 1;
        if angles.len() != expected {
            return Err(GeometryError::AngleArity { dim: self.dim, expected, got: angles.len() });
        }
        Ok(match self.dim {
            2 => self.radius_2d(angles[0]),
            _ => self.radius_3d(angles[0], angles[1]),
        })
    }

    pub(crate) fn radius_2d(&self, phi: f64) -> f64 {
        match self.kind {
            DomainKind::UnitBall => 1.0,
            DomainKind::RadialPerturbation => 1.0 - self.upsilon / 5.0 + self.upsilon * (8.0 * phi).sin(),
        }
    }

    pub(crate) fn radius_3d(&self, theta: f64, phi: f64) -> f64 {
        match self.kind {
            DomainKind::UnitBall => 1.0,
            DomainKind::RadialPerturbation => {
                1.0 - self.upsilon / 5.0 + self.upsilon * (3.0 * phi).sin() * (3.0 * theta).sin()
            }
        }
    }

    /// Boundary radius along the ray through `x` (which must be nonzero).
    pub fn radius_towards(&self, x: &Point) -> f64 {
        if self.kind == DomainKind::UnitBall {
            return 1.0;
        }
        let phi = x[1].atan2(x[0]);
        match self.dim {
            2 => self.radius_2d(phi),
            _ => {
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                let theta = (x[2] / r).clamp(-1.0, 1.0).acos();
                self.radius_3d(theta, phi)
            }
        }
    }

    /// Radial projection of a nonzero point onto the boundary.
    pub fn project_radially(&self, x: &Point) -> Point {
        let r = norm(x);
        let s = self.radius_towards(x) / r;
        [x[0] * s, x[1] * s, x[2] * s]
    }

    /// Boundary samples: `n` equally spaced angles in 2D, an `n x n`
    /// (theta, phi) grid with cell-centred theta in 3D.
    pub fn sample_boundary(&self, n: usize) -> Vec<Point> {
        match self.dim {
            2 => (0..n)
                .map(|i| {
                    let phi = 2.0 * PI * i as f64 / n as f64;
                    let r = self.radius_2d(phi);
                    [r * phi.cos(), r * phi.sin(), 0.0]
                })
                .collect(),
            _ => {
                let mut pts = Vec::with_capacity(n * n);
                for j in 0..n {
                    let theta = PI * (j as f64 + 0.5) / n as f64;
                    for i in 0..n {
                        let phi = 2.0 * PI * i as f64 / n as f64;
                        let r = self.radius_3d(theta, phi);
                        pts.push([
                            r * theta.sin() * phi.cos(),
                            r * theta.sin() * phi.sin(),
                            r * theta.cos(),
                        ]);
                    }
                }
                pts
            }
        }
    }
}

fn check_dim(dim: usize) -> Result<(), GeometryError> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(GeometryError::Dimension(dim))
    }
}

pub(crate) fn norm(x: &Point) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

fn dist(a: &Point, b: &Point) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    norm(&d)
}

/// Minimum number of boundary samples per angular direction.
pub const MIN_HAUSDORFF_SAMPLES: usize = 64;

/// Sampled Hausdorff distance between the boundaries of two domains.
///
/// Both boundaries are sampled with [`PerturbedDomain::sample_boundary`].
pub fn hausdorff_distance(
    a: &PerturbedDomain,
    b: &PerturbedDomain,
    n_samples: usize,
) -> Result<f64, GeometryError> {
    if a.dim != b.dim {
        return Err(GeometryError::DimensionMismatch(a.dim, b.dim));
    }
    if n_samples < MIN_HAUSDORFF_SAMPLES {
        return Err(GeometryError::TooFewSamples { min: MIN_HAUSDORFF_SAMPLES, got: n_samples });
    }
    let pa = a.sample_boundary(n_samples);
    let pb = b.sample_boundary(n_samples);
    hausdorff_points(&pa, &pb, a.dim)
}

/// Hausdorff distance `max(sup_a inf_b |a-b|, sup_b inf_a |a-b|)` between
/// two finite point sets.
///
/// Nearest-point searches are pruned with the bound
/// `|x - y| >= |x| sin(min(angle(x, y), pi/2))`, where the angle is taken
/// about the origin.
pub fn hausdorff_points(a: &[Point], b: &[Point], dim: usize) -> Result<f64, GeometryError> {
    if a.is_empty() || b.is_empty() {
        return Err(GeometryError::EmptyPointSet);
    }
    let (ab, ba) = match dim {
        2 => (directed_2d(a, b), directed_2d(b, a)),
        3 => (directed_3d(a, b), directed_3d(b, a)),
        d => return Err(GeometryError::Dimension(d)),
    };
    Ok(ab.max(ba))
}

fn directed_2d(from: &[Point], to: &[Point]) -> f64 {
    let mut sorted: Vec<(f64, Point)> = to.iter().map(|p| (angle_2pi(p), *p)).collect();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    let angles: Vec<f64> = sorted.iter().map(|s| s.0).collect();
    let n = sorted.len();

    let mut worst = 0.0f64;
    for x in from {
        let rx = norm(x);
        let ax = angle_2pi(x);
        let start = angles.partition_point(|&t| t < ax) % n;
        let mut best = f64::INFINITY;
        // Walk counter-clockwise then clockwise; each walk covers offsets up to pi.
        for step in [1isize, -1] {
            let mut k = if step == 1 { start } else { (start + n - 1) % n };
            for _ in 0..n {
                let off = if step == 1 {
                    (angles[k] - ax).rem_euclid(2.0 * PI)
                } else {
                    (ax - angles[k]).rem_euclid(2.0 * PI)
                };
                if off > PI || rx * off.min(PI / 2.0).sin() >= best {
                    break;
                }
                best = best.min(dist(x, &sorted[k].1));
                k = (k as isize + step).rem_euclid(n as isize) as usize;
            }
        }
        worst = worst.max(best);
    }
    worst
}

fn directed_3d(from: &[Point], to: &[Point]) -> f64 {
    let dirs: Vec<(Point, f64)> = to
        .iter()
        .map(|p| {
            let r = norm(p);
            ([p[0] / r, p[1] / r, p[2] / r], r)
        })
        .collect();
    let mut worst = 0.0f64;
    for x in from {
        let rx = norm(x);
        let ux = [x[0] / rx, x[1] / rx, x[2] / rx];
        let mut best = f64::INFINITY;
        for (k, (d, _)) in dirs.iter().enumerate() {
            let c = ux[0] * d[0] + ux[1] * d[1] + ux[2] * d[2];
            // sin of the angle, capped at 1 beyond pi/2
            let s = if c <= 0.0 { 1.0 } else { (1.0 - c * c).max(0.0).sqrt() };
            if rx * s >= best {
                continue;
            }
            best = best.min(dist(x, &to[k]));
        }
        worst = worst.max(best);
    }
    worst
}

fn angle_2pi(p: &Point) -> f64 {
    p[1].atan2(p[0]).rem_euclid(2.0 * PI)
}

/// Errors between `u = 1 - x^2 - y^2` on the unit disk and the solution
/// `u_r = 1 - (x - upsilon)^2 - y^2` of the shifted disk, extended by zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedDiskErrors {
    /// `||u - u_r||` over the unit disk.
    pub l2_error: f64,
    /// `||grad(u - u_r)||` over the unit disk.
    pub h1_seminorm_error: f64,
    /// Both norms restricted to the lens (intersection of the disks).
    pub l2_lens: f64,
    pub h1_lens: f64,
    /// Both norms restricted to the crescent (unit disk minus shifted disk).
    pub l2_crescent: f64,
    pub h1_crescent: f64,
}

/// Splits the unit disk into the lens and the crescent and integrates both
/// in polar coordinates about the origin with `quadrature_order` Gauss
/// points per direction.
///
/// Along the ray of angle `phi` the shifted circle is crossed at
/// `upsilon cos(phi) + sqrt(1 - upsilon^2 sin^2(phi))`; the circles
/// intersect at the angles `+-acos(upsilon / 2)`.
pub fn shifted_disk_errors(upsilon: f64, quadrature_order: usize) -> Result<ShiftedDiskErrors, GeometryError> {
    if quadrature_order < 2 {
        return Err(GeometryError::QuadratureOrder(quadrature_order));
    }
    if !(upsilon > 0.0 && upsilon < 0.5) {
        return Err(GeometryError::Upsilon(upsilon));
    }
    let (gx, gw) = gauss_legendre(quadrature_order);
    let rule = |a: f64, b: f64| -> Vec<(f64, f64)> {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        gx.iter().zip(&gw).map(|(&t, &w)| (m + h * t, h * w)).collect()
    };
    let shifted_exit = |phi: f64| upsilon * phi.cos() + (1.0 - (upsilon * phi.sin()).powi(2)).sqrt();

    // On the lens u - u_r = upsilon^2 - 2 upsilon x and grad(u - u_r) = (-2 upsilon, 0).
    let lens_l2 = |x: f64| (upsilon * upsilon - 2.0 * upsilon * x).powi(2);
    let lens_h1 = 4.0 * upsilon * upsilon;
    // On the crescent u_r = 0.
    let crescent_l2 = |rho: f64| (1.0 - rho * rho).powi(2);
    let crescent_h1 = |rho: f64| 4.0 * rho * rho;

    let phi_star = (upsilon / 2.0).acos();
    let mut l2_lens = 0.0;
    let mut h1_lens = 0.0;
    let mut l2_crescent = 0.0;
    let mut h1_crescent = 0.0;

    // Rays through the full unit radius: phi in (-phi_star, phi_star).
    for (phi, wphi) in rule(-phi_star, phi_star) {
        for (rho, wr) in rule(0.0, 1.0) {
            let w = wphi * wr * rho;
            l2_lens += w * lens_l2(rho * phi.cos());
            h1_lens += w * lens_h1;
        }
    }
    // Remaining rays leave the shifted disk before the unit circle.
    for (phi, wphi) in rule(phi_star, 2.0 * PI - phi_star) {
        let exit = shifted_exit(phi);
        for (rho, wr) in rule(0.0, exit) {
            let w = wphi * wr * rho;
            l2_lens += w * lens_l2(rho * phi.cos());
            h1_lens += w * lens_h1;
        }
        for (rho, wr) in rule(exit, 1.0) {
            let w = wphi * wr * rho;
            l2_crescent += w * crescent_l2(rho);
            h1_crescent += w * crescent_h1(rho);
        }
    }

    Ok(ShiftedDiskErrors {
        l2_error: (l2_lens + l2_crescent).sqrt(),
        h1_seminorm_error: (h1_lens + h1_crescent).sqrt(),
        l2_lens: l2_lens.sqrt(),
        h1_lens: h1_lens.sqrt(),
        l2_crescent: l2_crescent.sqrt(),
        h1_crescent: h1_crescent.sqrt(),
    })
}

/// Sup-norm statistics of `I - J F^{-1} F^{-T}` for a map with gradient `F`
/// and `J = det F`, over a set of sample points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapDiagnostics {
    pub sup_norm_defect: f64,
    pub jacobian_min: f64,
    pub jacobian_max: f64,
}

/// Evaluates [`MapDiagnostics`] for a 2D map given its gradient.
/// The matrix norm is the row-sum (infinity) norm.
pub fn map_diagnostics(gradient: impl Fn(&Point) -> [[f64; 2]; 2], points: &[Point]) -> MapDiagnostics {
    let mut out = MapDiagnostics {
        sup_norm_defect: 0.0,
        jacobian_min: f64::INFINITY,
        jacobian_max: f64::NEG_INFINITY,
    };
    for p in points {
        let f = gradient(p);
        let det = f[0][0] * f[1][1] - f[0][1] * f[1][0];
        // F^{-1} F^{-T} = (F^T F)^{-1}
        let g = [
            [f[0][0] * f[0][0] + f[1][0] * f[1][0], f[0][0] * f[0][1] + f[1][0] * f[1][1]],
            [f[0][1] * f[0][0] + f[1][1] * f[1][0], f[0][1] * f[0][1] + f[1][1] * f[1][1]],
        ];
        let gdet = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        let ginv = [[g[1][1] / gdet, -g[0][1] / gdet], [-g[1][0] / gdet, g[0][0] / gdet]];
        let mut row_max = 0.0f64;
        for (i, row) in ginv.iter().enumerate() {
            let s: f64 = row
                .iter()
                .enumerate()
                .map(|(j, &v)| ((if i == j { 1.0 } else { 0.0 }) - det * v).abs())
                .sum();
            row_max = row_max.max(s);
        }
        out.sup_norm_defect = out.sup_norm_defect.max(row_max);
        out.jacobian_min = out.jacobian_min.min(det);
        out.jacobian_max = out.jacobian_max.max(det);
    }
    out
}

/// Diagnostics of the map `x -> ((1+u)^{-1} x1, (1+u) x2)` from the unit
/// disk onto the ellipse `(1+u)^2 x1^2 + (1+u)^{-2} x2^2 < 1`.
pub fn ellipse_map_diagnostics(upsilon: f64, sample_points: &[Point]) -> Result<MapDiagnostics, GeometryError> {
    if !upsilon.is_finite() || upsilon < 0.0 {
        return Err(GeometryError::Upsilon(upsilon));
    }
    if sample_points.is_empty() {
        return Err(GeometryError::EmptyPointSet);
    }
    if let Some(p) = sample_points.iter().find(|p| p[0] * p[0] + p[1] * p[1] > 1.0 + 1e-12) {
        return Err(GeometryError::PointOutsideDisk(*p));
    }
    let s = 1.0 + upsilon;
    Ok(map_diagnostics(|_| [[1.0 / s, 0.0], [0.0, s]], sample_points))
}

/// Points of a polar grid in the closed unit disk, used as default samples.
pub fn disk_sample_points(n_radial: usize, n_angular: usize) -> Vec<Point> {
    let mut pts = vec![[0.0; 3]];
    for i in 1..=n_radial {
        let r = i as f64 / n_radial as f64;
        for j in 0..n_angular {
            let phi = 2.0 * PI * j as f64 / n_angular as f64;
            pts.push([r * phi.cos(), r * phi.sin(), 0.0]);
        }
    }
    pts
}
