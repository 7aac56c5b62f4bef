//! Adaptive Dormand-Prince 5(4) integration of complex linear and nonlinear
//! first-order systems.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{IsoError, Result};

/// Complex state vector.
pub type State = DVector<C64>;

/// Step-size control parameters.
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest admissible step relative to the span being integrated.
    pub min_step: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rtol: 1e-12, atol: 1e-14, min_step: 1e-14 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(r, y)` from `r0` to `r1` (either direction) starting at
/// `y0`, returning the state at `r1`.
pub fn integrate<F>(f: &F, r0: f64, r1: f64, y0: &State, tol: &Tolerance) -> Result<State>
where
    F: Fn(f64, &State) -> State,
{
    let span = r1 - r0;
    if span == 0.0 {
        return Ok(y0.clone());
    }
    let dir = span.signum();
    let floor = tol.min_step * span.abs().max(r0.abs()).max(1e-300);
    let mut h = span.abs() / 16.0;
    let mut r = r0;
    let mut y = y0.clone();
    let mut k1 = f(r, &y);
    let mut steps = 0usize;
    while (r1 - r) * dir > 0.0 {
        steps += 1;
        if steps > 10_000_000 {
            return Err(IsoError::Integration("step budget exhausted".into()));
        }
        if h > (r1 - r).abs() {
            h = (r1 - r).abs();
        }
        let hs = h * dir;
        let mut k: Vec<State> = Vec::with_capacity(7);
        k.push(k1.clone());
        for s in 1..7 {
            let mut ys = y.clone();
            for (l, kl) in k.iter().enumerate().take(s) {
                if A[s][l] != 0.0 {
                    ys.axpy(C64::new(hs * A[s][l], 0.0), kl, C64::new(1.0, 0.0));
                }
            }
            k.push(f(r + C[s] * hs, &ys));
        }
        let mut y5 = y.clone();
        let mut err = 0.0f64;
        for i in 0..y.len() {
            let mut d5 = C64::new(0.0, 0.0);
            let mut d4 = C64::new(0.0, 0.0);
            for s in 0..7 {
                d5 += k[s][i] * B5[s];
                d4 += k[s][i] * B4[s];
            }
            y5[i] += d5 * hs;
            let sc = tol.atol + tol.rtol * y[i].norm().max(y5[i].norm());
            err = err.max(((d5 - d4) * hs).norm() / sc);
        }
        if !err.is_finite() {
            return Err(IsoError::Integration(format!("non-finite state near r = {r}")));
        }
        if err <= 1.0 {
            r = if (r1 - (r + hs)) * dir <= 0.0 { r1 } else { r + hs };
            y = y5;
            k1 = k[6].clone();
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < floor {
                return Err(IsoError::Integration(format!("step size fell below floor near r = {r}")));
            }
        }
    }
    Ok(y)
}

/// Integrates through a monotone list of abscissae starting from `y0` at
/// `start` and returns the state at every abscissa.
pub fn integrate_to_points<F>(f: &F, start: f64, y0: &State, points: &[f64], tol: &Tolerance) -> Result<Vec<State>>
where
    F: Fn(f64, &State) -> State,
{
    let mut out = Vec::with_capacity(points.len());
    let mut r = start;
    let mut y = y0.clone();
    for &p in points {
        y = integrate(f, r, p, &y, tol)?;
        r = p;
        out.push(y.clone());
    }
    Ok(out)
}

/// Classical fourth-order Runge-Kutta over `n` equal substeps; used as an
/// independent one-step propagator when measuring solution defects.
pub fn rk4<F>(f: &F, r0: f64, r1: f64, y0: &State, n: usize) -> State
where
    F: Fn(f64, &State) -> State,
{
    let h = (r1 - r0) / n as f64;
    let mut y = y0.clone();
    let mut r = r0;
    for _ in 0..n {
        let k1 = f(r, &y);
        let k2 = f(r + h / 2.0, &(&y + &k1 * C64::new(h / 2.0, 0.0)));
        let k3 = f(r + h / 2.0, &(&y + &k2 * C64::new(h / 2.0, 0.0)));
        let k4 = f(r + h, &(&y + &k3 * C64::new(h, 0.0)));
        y += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
        r += h;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_as_complex_exponential() {
        // y' = i k y has solution exp(i k r).
        let k = 1.7;
        let f = |_r: f64, y: &State| y * C64::new(0.0, k);
        let y0 = State::from_vec(vec![C64::new(1.0, 0.0)]);
        let y = integrate(&f, 0.0, 10.0, &y0, &Tolerance::default()).unwrap();
        let exact = C64::new(0.0, k * 10.0).exp();
        assert!((y[0] - exact).norm() < 1e-10);
    }

    #[test]
    fn backward_integration() {
        let f = |r: f64, y: &State| y * C64::new(-1.0 / r, 0.0);
        let y0 = State::from_vec(vec![C64::new(0.5, 0.0)]);
        // y = 1/r, from r=2 down to r=0.5.
        let y = integrate(&f, 2.0, 0.5, &y0, &Tolerance::default()).unwrap();
        assert!((y[0] - C64::new(2.0, 0.0)).norm() < 1e-11);
    }

    #[test]
    fn rk4_agrees_with_dopri() {
        let f = |r: f64, y: &State| State::from_vec(vec![y[1], -y[0] * C64::new(1.0 + r * 0.1, 0.0)]);
        let y0 = State::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.3)]);
        let a = integrate(&f, 0.0, 1.0, &y0, &Tolerance::default()).unwrap();
        let b = rk4(&f, 0.0, 1.0, &y0, 400);
        assert!((a - b).norm() < 1e-11);
    }
}
