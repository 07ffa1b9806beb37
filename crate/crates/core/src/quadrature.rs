//! One-dimensional Gauss–Legendre rules.

use std::f64::consts::PI;

/// Gauss–Legendre rule with `n` points on `[0, 1]`.
///
/// Returns `(points, weights)` sorted by increasing point; the weights sum
/// to one. The rule integrates polynomials up to degree `2n - 1` exactly.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "a Gauss rule needs at least one point");
    let (x, w) = gauss_legendre(n);
    let points = x.iter().map(|&t| 0.5 * (t + 1.0)).collect();
    let weights = w.iter().map(|&v| 0.5 * v).collect();
    (points, weights)
}

/// Gauss–Legendre rule with `n` points on `[-1, 1]`, via Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th largest root.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Number of Gauss points needed to integrate polynomials of `order` exactly.
pub fn points_for_order(order: usize) -> usize {
    order / 2 + 1
}

/// Integrates `f` over `[a, b]` with an `n`-point Gauss rule.
pub fn integrate_interval(n: usize, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    x.iter()
        .zip(&w)
        .map(|(&t, &wt)| wt * f(mid + half * t))
        .sum::<f64>()
        * half
}
