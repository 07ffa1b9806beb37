//! Block layout of the ball: a Cartesian core plus one shell block per core
//! face, each shell block mapped by a linear blend between the flat core
//! face and the curved outer boundary.

use crate::geometry::PerturbedDomain;
use crate::Point;

pub(crate) const CORE_HALF_WIDTH_2D: f64 = 0.4;
pub(crate) const CORE_HALF_WIDTH_3D: f64 = 0.35;

/// Patch `0` is the core; patch `1 + 2 axis + s` is the shell block over the
/// core face normal to `axis` on the positive (`s = 0`) or negative side.
/// Shell local coordinates are `(u_0, .., u_{d-2}, w)` with `w` radial.
#[derive(Debug, Clone)]
pub(crate) struct BallLayout {
    dim: usize,
    core: f64,
    /// Reflect the first local coordinate to keep the block map orientation
    /// positive.
    flip: Vec<bool>,
}

impl BallLayout {
    pub(crate) fn new(dim: usize) -> Self {
        let core = if dim == 2 { CORE_HALF_WIDTH_2D } else { CORE_HALF_WIDTH_3D };
        let mut layout = Self { dim, core, flip: vec![false; 1 + 2 * dim] };
        let ball = PerturbedDomain::unit_ball(dim).expect("dim is 2 or 3");
        for p in 0..layout.n_patches() {
            layout.flip[p] = layout.orientation(&ball, p) < 0.0;
        }
        layout
    }

    pub(crate) fn n_patches(&self) -> usize {
        1 + 2 * self.dim
    }

    /// Sign of the block-map Jacobian at the block centre.
    fn orientation(&self, domain: &PerturbedDomain, patch: usize) -> f64 {
        let d = self.dim;
        let c = [0.5; 3];
        let h = 1e-6;
        let mut jac = [[0.0; 3]; 3];
        for b in 0..d {
            let mut lo = c;
            let mut hi = c;
            lo[b] -= h;
            hi[b] += h;
            let (xl, xh) = (self.map(domain, patch, lo), self.map(domain, patch, hi));
            for a in 0..d {
                jac[a][b] = (xh[a] - xl[a]) / (2.0 * h);
            }
        }
        if d == 2 {
            jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]
        } else {
            jac[0][0] * (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1])
                - jac[0][1] * (jac[1][0] * jac[2][2] - jac[1][2] * jac[2][0])
                + jac[0][2] * (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0])
        }
    }

    /// Physical position of block-local coordinates `local` in `[0,1]^dim`.
    pub(crate) fn map(&self, domain: &PerturbedDomain, patch: usize, local: [f64; 3]) -> Point {
        let d = self.dim;
        let c = self.core;
        if patch == 0 {
            let mut x = [0.0; 3];
            for a in 0..d {
                x[a] = c * (2.0 * local[a] - 1.0);
            }
            return x;
        }
        let (axis, sign) = ((patch - 1) / 2, if (patch - 1).is_multiple_of(2) { 1.0 } else { -1.0 });
        let mut u = local;
        if self.flip[patch] {
            u[0] = 1.0 - u[0];
        }
        let w = u[d - 1];
        let mut q = [0.0; 3];
        q[axis] = sign * c;
        let mut k = 0;
        for (t, qt) in q.iter_mut().enumerate().take(d) {
            if t != axis {
                *qt = c * (2.0 * u[k] - 1.0);
                k += 1;
            }
        }
        if w == 0.0 {
            return q;
        }
        let outer = domain.project_radially(&q);
        let mut x = [0.0; 3];
        for a in 0..d {
            x[a] = (1.0 - w) * q[a] + w * outer[a];
        }
        x
    }

    /// Local coordinate axis and side on which a shell block meets the outer
    /// boundary. The core block has no boundary face.
    pub(crate) fn outer_face(&self, patch: usize) -> Option<usize> {
        (patch != 0).then_some(2 * (self.dim - 1) + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shell_blocks_meet_core_and_boundary() {
        for dim in [2, 3] {
            let layout = BallLayout::new(dim);
            let dom = PerturbedDomain::radial(dim, 0.1).unwrap();
            for p in 1..layout.n_patches() {
                let mut local = [0.3, 0.6, 0.0];
                local[dim - 1] = 1.0;
                let x = layout.map(&dom, p, local);
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                assert!((r - dom.radius_towards(&x)).abs() < 1e-14);
                local[dim - 1] = 0.0;
                let x = layout.map(&dom, p, local);
                let inf = x.iter().take(dim).fold(0.0f64, |m, v| m.max(v.abs()));
                assert!((inf - layout.core).abs() < 1e-15);
            }
            for p in 0..layout.n_patches() {
                assert!(layout.orientation(&dom, p) > 0.0);
            }
        }
    }
}
