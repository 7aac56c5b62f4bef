//! Bessel functions of real order for positive real argument.
//!
//! `bessel_jy` follows the classical Temme/Steed scheme: the ratio `J'/J` from a
//! continued fraction, downward recurrence to a small order, Temme's series for
//! `x < 2` or Steed's complex continued fraction for `x >= 2`, then upward
//! recurrence for `Y`.

use num_complex::Complex64 as C64;

use crate::error::{IsoError, Result};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAXIT: usize = 100_000;
const XMIN: f64 = 2.0;

/// Values of `J_nu(x)`, `Y_nu(x)` and their derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselJY {
    pub j: f64,
    pub y: f64,
    pub jp: f64,
    pub yp: f64,
}

fn chebev(a: f64, b: f64, c: &[f64], x: f64) -> f64 {
    let y = (2.0 * x - a - b) / (b - a);
    let y2 = 2.0 * y;
    let (mut d, mut dd) = (0.0, 0.0);
    for &cj in c.iter().skip(1).rev() {
        let sv = d;
        d = y2 * d - dd + cj;
        dd = sv;
    }
    y * d - dd + 0.5 * c[0]
}

/// Gamma-function combinations used by Temme's series for `|xnu| <= 1/2`:
/// returns `(gam1, gam2, 1/Gamma(1+xnu), 1/Gamma(1-xnu))`.
fn beschb(x: f64) -> (f64, f64, f64, f64) {
    const C1: [f64; 7] = [
        -1.142022680371168e0,
        6.5165112670737e-3,
        3.087090173086e-4,
        -3.4706269649e-6,
        6.9437664e-9,
        3.67795e-11,
        -1.356e-13,
    ];
    const C2: [f64; 8] = [
        1.843740587300905e0,
        -7.68528408447867e-2,
        1.2719271366546e-3,
        -4.9717367042e-6,
        -3.31261198e-8,
        2.423096e-10,
        -1.702e-13,
        -1.49e-15,
    ];
    let xx = 8.0 * x * x - 1.0;
    let gam1 = chebev(-1.0, 1.0, &C1, xx);
    let gam2 = chebev(-1.0, 1.0, &C2, xx);
    let gampl = gam2 - x * gam1;
    let gammi = gam2 + x * gam1;
    (gam1, gam2, gampl, gammi)
}

/// Bessel functions of the first and second kind of real order `nu >= 0` at
/// `x > 0`, with derivatives.
pub fn bessel_jy(nu: f64, x: f64) -> Result<BesselJY> {
    use std::f64::consts::PI;
    if x <= 0.0 || nu < 0.0 || !x.is_finite() || !nu.is_finite() {
        return Err(IsoError::Domain(format!("bessel_jy needs x > 0 and nu >= 0 (nu={nu}, x={x})")));
    }
    let nl = if x < XMIN { (nu + 0.5) as i64 } else { ((nu - x + 1.5) as i64).max(0) };
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // Continued fraction for J'_nu / J_nu (modified Lentz).
    let mut isign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..MAXIT {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() <= EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(IsoError::Integration(format!("Bessel continued fraction did not converge (nu={nu}, x={x})")));
    }

    // Downward recurrence to order xmu.
    let mut rjl = isign * FPMIN;
    let mut rjpl = h * rjl;
    let rjl1 = rjl;
    let rjp1 = rjpl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    let (rjmu, rymu, rymup, ry1);
    if x < XMIN {
        // Temme's series.
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let dd = -x2.ln();
        let e = xmu * dd;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = beschb(xmu);
        let mut ff = 2.0 / PI * fact * (gam1 * e.cosh() + gam2 * fact2 * dd);
        let e = e.exp();
        let mut p = e / (gampl * PI);
        let mut q = 1.0 / (e * PI * gammi);
        let pimu2 = 0.5 * pimu;
        let fact3 = if pimu2.abs() < EPS { 1.0 } else { pimu2.sin() / pimu2 };
        let r = PI * pimu2 * fact3 * fact3;
        let mut c = 1.0;
        let d = -x2 * x2;
        let mut sum = ff + r * q;
        let mut sum1 = p;
        let mut ok = false;
        for i in 1..=MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            c *= d / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = c * (ff + r * q);
            sum += del;
            let del1 = c * p - fi * del;
            sum1 += del1;
            if del.abs() < (1.0 + sum.abs()) * EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(IsoError::Integration("Bessel Temme series did not converge".into()));
        }
        rymu = -sum;
        ry1 = -sum1 * xi2;
        rymup = xmu * xi * rymu - ry1;
        rjmu = w / (rymup - f * rymu);
    } else {
        // Steed's complex continued fraction for p + iq.
        let mut a = 0.25 - xmu2;
        let mut pq = C64::new(-0.5 * xi, 1.0);
        let bb0 = C64::new(2.0 * x, 2.0);
        let fact = a * xi / pq.norm_sqr();
        let mut cc = C64::new(2.0 * x + pq.im * fact, 2.0 + pq.re * fact);
        let mut den = bb0.norm_sqr();
        let mut dd = C64::new(bb0.re / den, -bb0.im / den);
        let mut bb = bb0;
        let mut dl = cc * dd;
        pq *= dl;
        let mut ok = false;
        for i in 2..=MAXIT {
            a += 2.0 * (i as f64 - 1.0);
            bb.im += 2.0;
            dd = dd * a + bb;
            if dd.re.abs() + dd.im.abs() < FPMIN {
                dd.re = FPMIN;
            }
            let fact = a / cc.norm_sqr();
            cc = bb + C64::new(cc.re * fact, -cc.im * fact);
            if cc.re.abs() + cc.im.abs() < FPMIN {
                cc.re = FPMIN;
            }
            den = dd.norm_sqr();
            dd = C64::new(dd.re / den, -dd.im / den);
            dl = cc * dd;
            pq *= dl;
            if (dl.re - 1.0).abs() + dl.im.abs() <= EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(IsoError::Integration("Bessel Steed fraction did not converge".into()));
        }
        let (p, q) = (pq.re, pq.im);
        let gam = (p - f) / q;
        let mut r = (w / ((p - f) * gam + q)).sqrt();
        if rjl < 0.0 {
            r = -r;
        }
        rjmu = r;
        rymu = rjmu * gam;
        rymup = rymu * (p + q / gam);
        ry1 = xmu * xi * rymu - rymup;
    }

    let fact = rjmu / rjl;
    let j = rjl1 * fact;
    let jp = rjp1 * fact;
    let (mut ymu, mut y1) = (rymu, ry1);
    for i in 1..=nl {
        let ytemp = (xmu + i as f64) * xi2 * y1 - ymu;
        ymu = y1;
        y1 = ytemp;
    }
    Ok(BesselJY { j, y: ymu, jp, yp: nu * xi * ymu - y1 })
}

/// `J_nu(x)`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    Ok(bessel_jy(nu, x)?.j)
}

/// `Y_nu(x)`.
pub fn bessel_y(nu: f64, x: f64) -> Result<f64> {
    Ok(bessel_jy(nu, x)?.y)
}

/// Hankel function `H^{(1)}_nu(x) = J + iY` (outgoing, `~ e^{ix}`).
pub fn hankel1(nu: f64, x: f64) -> Result<C64> {
    let b = bessel_jy(nu, x)?;
    Ok(C64::new(b.j, b.y))
}

/// Hankel function `H^{(2)}_nu(x) = J - iY` (incoming, `~ e^{-ix}`).
pub fn hankel2(nu: f64, x: f64) -> Result<C64> {
    let b = bessel_jy(nu, x)?;
    Ok(C64::new(b.j, -b.y))
}
