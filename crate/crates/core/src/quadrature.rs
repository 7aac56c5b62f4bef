//! Quadrature rules: Gauss-Legendre nodes, a reflection-symmetric sphere grid
//! and composite Simpson weights for radial grids.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{IsoError, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, computed by Newton iteration
/// on the three-term Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Product grid on the unit sphere: Gauss-Legendre in `cos(theta)` times a
/// uniform trapezoid rule in `phi`.
///
/// With an even number of azimuthal points the grid is closed under the
/// reflection `(theta, phi) -> (pi - theta, phi + pi)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SphereGrid {
    /// Polar angles, increasing.
    pub theta: Vec<f64>,
    /// Weights in `cos(theta)` for each polar node.
    pub theta_weight: Vec<f64>,
    /// Azimuths `2 pi k / n_phi`.
    pub phi: Vec<f64>,
}

impl SphereGrid {
    /// Builds a grid with `n_theta` polar and `n_phi` azimuthal nodes.
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 || !n_phi.is_multiple_of(2) {
            return Err(IsoError::Domain("sphere grid needs n_theta > 0 and even n_phi > 0".into()));
        }
        let (x, w) = gauss_legendre(n_theta);
        // Increasing theta means decreasing cos(theta).
        let theta: Vec<f64> = x.iter().rev().map(|c| c.acos()).collect();
        let theta_weight: Vec<f64> = w.iter().rev().copied().collect();
        let phi = (0..n_phi).map(|k| 2.0 * PI * k as f64 / n_phi as f64).collect();
        Ok(SphereGrid { theta, theta_weight, phi })
    }

    /// The default grid: order 64 in `cos(theta)`, 128 azimuths.
    pub fn standard() -> Self {
        SphereGrid::new(64, 128).expect("valid default grid")
    }

    /// Weight of node `(i, k)` for integration against `sin(theta) dtheta dphi`.
    pub fn weight(&self, i: usize, _k: usize) -> f64 {
        self.theta_weight[i] * 2.0 * PI / self.phi.len() as f64
    }

    /// Indices of the reflected node `(pi - theta_i, phi_k + pi)`.
    pub fn reflect(&self, i: usize, k: usize) -> (usize, usize) {
        let np = self.phi.len();
        (self.theta.len() - 1 - i, (k + np / 2) % np)
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.theta.len() * self.phi.len()
    }

    /// True when the grid has no nodes.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Polar indices in the upper half-space `theta < pi/2`.
    pub fn upper_half(&self) -> std::ops::Range<usize> {
        0..self.theta.len() / 2
    }

    /// Integrates a function sampled by `f(theta, phi)` over the sphere.
    pub fn integrate<F>(&self, mut f: F) -> num_complex::Complex64
    where
        F: FnMut(f64, f64) -> num_complex::Complex64,
    {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for (i, &t) in self.theta.iter().enumerate() {
            let mut row = num_complex::Complex64::new(0.0, 0.0);
            for &p in &self.phi {
                row += f(t, p);
            }
            acc += row * self.weight(i, 0);
        }
        acc
    }
}

/// Composite Simpson weights on a uniform grid.
pub fn simpson_weights(grid: &[f64]) -> Result<Vec<f64>> {
    let n = grid.len();
    if n < 3 {
        return Err(IsoError::Domain("Simpson rule needs at least 3 points".into()));
    }
    let h = (grid[n - 1] - grid[0]) / (n - 1) as f64;
    for k in 1..n {
        if ((grid[k] - grid[k - 1]) - h).abs() > 1e-9 * h.abs().max(1.0) {
            return Err(IsoError::Domain("Simpson rule needs a uniform grid".into()));
        }
    }
    let mut w = vec![0.0; n];
    let intervals = n - 1;
    // Odd interval counts close with the 3/8 rule on the last three intervals.
    let simpson_intervals = if intervals.is_multiple_of(2) { intervals } else { intervals - 3 };
    for k in (0..simpson_intervals).step_by(2) {
        w[k] += h / 3.0;
        w[k + 1] += 4.0 * h / 3.0;
        w[k + 2] += h / 3.0;
    }
    if intervals % 2 == 1 {
        let k = simpson_intervals;
        for (o, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[k + o] += 3.0 * h / 8.0 * c;
        }
    }
    Ok(w)
}

/// A uniform grid of `n` points on `[a, b]`.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// Fourth-order finite-difference derivative of samples on a uniform grid with
/// spacing `h`: centered five-point stencils inside, one-sided five-point
/// stencils at the two nodes nearest each end.
pub fn derivative4(h: f64, y: &[num_complex::Complex64]) -> Result<Vec<num_complex::Complex64>> {
    let n = y.len();
    if n < 5 {
        return Err(IsoError::Domain("fourth-order differences need at least 5 samples".into()));
    }
    let c = 1.0 / (12.0 * h);
    let mut d = vec![num_complex::Complex64::new(0.0, 0.0); n];
    for i in 2..n - 2 {
        d[i] = (y[i - 2] - y[i - 1] * 8.0 + y[i + 1] * 8.0 - y[i + 2]) * c;
    }
    d[0] = (y[0] * -25.0 + y[1] * 48.0 - y[2] * 36.0 + y[3] * 16.0 - y[4] * 3.0) * c;
    d[1] = (y[0] * -3.0 - y[1] * 10.0 + y[2] * 18.0 - y[3] * 6.0 + y[4]) * c;
    d[n - 1] = (y[n - 1] * 25.0 - y[n - 2] * 48.0 + y[n - 3] * 36.0 - y[n - 4] * 16.0 + y[n - 5] * 3.0) * c;
    d[n - 2] = (y[n - 1] * 3.0 + y[n - 2] * 10.0 - y[n - 3] * 18.0 + y[n - 4] * 6.0 - y[n - 5]) * c;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(10);
        // Degree 19 is the exactness limit; check x^18.
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn odd_order_has_zero_node() {
        let (x, _) = gauss_legendre(5);
        assert!(x[2].abs() < 1e-15);
    }

    #[test]
    fn sphere_area() {
        let g = SphereGrid::new(16, 8).unwrap();
        let a = g.integrate(|_, _| num_complex::Complex64::new(1.0, 0.0));
        assert!((a.re - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn reflection_maps_nodes() {
        let g = SphereGrid::new(6, 8).unwrap();
        let (i, k) = g.reflect(1, 3);
        assert!((g.theta[i] - (PI - g.theta[1])).abs() < 1e-13);
        assert!((g.phi[k] - (g.phi[3] + PI)).abs() < 1e-13);
    }

    #[test]
    fn derivative4_is_exact_for_quartics() {
        let grid = uniform_grid(0.0, 1.0, 9);
        let h = grid[1] - grid[0];
        let y: Vec<_> = grid.iter().map(|x| num_complex::Complex64::new(x.powi(4) - x, 2.0 * x * x)).collect();
        let d = derivative4(h, &y).unwrap();
        for (x, d) in grid.iter().zip(&d) {
            let exact = num_complex::Complex64::new(4.0 * x.powi(3) - 1.0, 4.0 * x);
            assert!((d - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        for n in [11, 12] {
            let grid = uniform_grid(0.5, 2.0, n);
            let w = simpson_weights(&grid).unwrap();
            let s: f64 = grid.iter().zip(&w).map(|(x, w)| w * x.powi(3)).sum();
            assert!((s - (2f64.powi(4) - 0.5f64.powi(4)) / 4.0).abs() < 1e-12, "n={n}");
        }
    }
}
