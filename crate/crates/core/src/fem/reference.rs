use super::{FemError, QuadratureRule};

/// Tensor-product Lagrange element on `[0,1]^dim` with equispaced nodes.
///
/// Basis function `i` belongs to the node with per-axis indices
/// `i_a = (i / (r+1)^a) % (r+1)`, i.e. lexicographic with the first axis
/// fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceElement {
    dim: usize,
    degree: usize,
    nodes_1d: Vec<f64>,
}

/// Basis values and reference gradients at every point of a rule.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub values: Vec<Vec<f64>>,
    pub grads: Vec<Vec<[f64; 3]>>,
}

impl ReferenceElement {
    pub fn new(dim: usize, degree: usize) -> Result<Self, FemError> {
        if !(1..=3).contains(&dim) {
            return Err(FemError::Unsupported(format!("reference element of dimension {dim}")));
        }
        if degree == 0 {
            return Err(FemError::Unsupported("degree 0 element".into()));
        }
        let nodes_1d = (0..=degree).map(|k| k as f64 / degree as f64).collect();
        Ok(Self { dim, degree, nodes_1d })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_basis(&self) -> usize {
        (self.degree + 1).pow(self.dim as u32)
    }

    /// Reference coordinates of node `i`.
    pub fn node(&self, i: usize) -> [f64; 3] {
        let k = self.degree + 1;
        let mut x = [0.0; 3];
        let mut rem = i;
        for xa in x.iter_mut().take(self.dim) {
            *xa = self.nodes_1d[rem % k];
            rem /= k;
        }
        x
    }

    /// 1D Lagrange factors and their derivatives at `t`.
    fn factors(&self, t: f64, values: &mut [f64], derivs: &mut [f64]) {
        let n = &self.nodes_1d;
        for k in 0..n.len() {
            let mut v = 1.0;
            let mut d = 0.0;
            for m in 0..n.len() {
                if m == k {
                    continue;
                }
                let denom = n[k] - n[m];
                // product rule: d(v * (t - n_m)/denom) = d * (t - n_m)/denom + v / denom
                d = d * (t - n[m]) / denom + v / denom;
                v *= (t - n[m]) / denom;
            }
            values[k] = v;
            derivs[k] = d;
        }
    }

    /// Basis values and reference-space gradients at `point`.
    pub fn shape_eval(&self, point: &[f64; 3]) -> (Vec<f64>, Vec<[f64; 3]>) {
        let mut values = vec![0.0; self.n_basis()];
        let mut grads = vec![[0.0; 3]; self.n_basis()];
        self.shape_eval_into(point, &mut values, &mut grads);
        (values, grads)
    }

    pub fn shape_eval_into(&self, point: &[f64; 3], values: &mut [f64], grads: &mut [[f64; 3]]) {
        let k = self.degree + 1;
        let mut fv = [[0.0; 8]; 3];
        let mut fd = [[0.0; 8]; 3];
        assert!(k <= 8, "degree too high for the fixed-size factor buffers");
        for a in 0..self.dim {
            self.factors(point[a], &mut fv[a][..k], &mut fd[a][..k]);
        }
        for i in 0..self.n_basis() {
            let mut idx = [0usize; 3];
            let mut rem = i;
            for ia in idx.iter_mut().take(self.dim) {
                *ia = rem % k;
                rem /= k;
            }
            let mut v = 1.0;
            for a in 0..self.dim {
                v *= fv[a][idx[a]];
            }
            values[i] = v;
            let mut g = [0.0; 3];
            for (a, ga) in g.iter_mut().enumerate().take(self.dim) {
                let mut p = fd[a][idx[a]];
                for b in 0..self.dim {
                    if b != a {
                        p *= fv[b][idx[b]];
                    }
                }
                *ga = p;
            }
            grads[i] = g;
        }
    }

    pub fn tabulate(&self, rule: &QuadratureRule) -> Tabulation {
        let (values, grads) = rule.points().iter().map(|p| self.shape_eval(p)).unzip();
        Tabulation { values, grads }
    }
}
