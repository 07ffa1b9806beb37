use crate::quadrature::{gauss_legendre_unit, points_for_order};

/// Tensor Gauss–Legendre rule on `[0,1]^dim`; weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    dim: usize,
    order: usize,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Rule exact for tensor polynomials of degree `order` in each variable.
    pub fn gauss(dim: usize, order: usize) -> Self {
        let n = points_for_order(order);
        let (x, w) = gauss_legendre_unit(n);
        let total = n.pow(dim as u32);
        let mut points = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for i in 0..total {
            let mut p = [0.0; 3];
            let mut wt = 1.0;
            let mut rem = i;
            for pa in p.iter_mut().take(dim) {
                *pa = x[rem % n];
                wt *= w[rem % n];
                rem /= n;
            }
            points.push(p);
            weights.push(wt);
        }
        Self { dim, order, points, weights }
    }

    /// The same rule on the sub-box `lo + [0, size]^dim` of the unit cell.
    pub fn restricted(&self, lo: &[f64; 3], size: f64) -> Self {
        let scale = size.powi(self.dim as i32);
        let points = self
            .points
            .iter()
            .map(|p| {
                let mut q = [0.0; 3];
                for a in 0..self.dim {
                    q[a] = lo[a] + size * p[a];
                }
                q
            })
            .collect();
        let weights = self.weights.iter().map(|w| w * scale).collect();
        Self { dim: self.dim, order: self.order, points, weights }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
