//! Wigner rotation functions.
//!
//! Convention: `D^j_{m m'}(a, b, c) = exp(-i m a) d^j_{m m'}(b) exp(-i m' c)` with
//! the small function given by the explicit Wigner sum
//!
//! ```text
//! d^j_{m m'}(b) = sum_k (-1)^(k + m - m') sqrt((j+m)!(j-m)!(j+m')!(j-m')!)
//!                 / ((j+m'-k)! k! (j-m-k)! (m-m'+k)!)
//!                 * cos(b/2)^(2j+m'-m-2k) * sin(b/2)^(m-m'+2k)
//! ```
//!
//! With this choice `d^{1/2}_{1/2,-1/2}(b) = -sin(b/2)` and
//! `d^j_{m m'}(pi) = (-1)^(j-m') delta_{m,-m'}`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{IsoError, Result};
use crate::halfint::HalfInt;

/// Euler angles `(alpha, beta, gamma)` in radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    /// First rotation angle.
    pub alpha: f64,
    /// Polar angle, in `[0, pi]` after normalization.
    pub beta: f64,
    /// Third rotation angle.
    pub gamma: f64,
}

impl EulerAngles {
    /// Builds angles without normalization.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        EulerAngles { alpha, beta, gamma }
    }

    /// The spherical-coordinate triple `(phi, theta, 0)`.
    pub fn spherical(theta: f64, phi: f64) -> Self {
        EulerAngles { alpha: phi, beta: theta, gamma: 0.0 }
    }

    /// Reduces `alpha`, `gamma` to `[0, 2 pi)`; errors if `beta` is outside `[0, pi]`.
    pub fn normalized(self) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&self.beta) {
            return Err(IsoError::Domain(format!("beta = {} outside [0, pi]", self.beta)));
        }
        let tau = 2.0 * std::f64::consts::PI;
        Ok(EulerAngles {
            alpha: self.alpha.rem_euclid(tau),
            beta: self.beta,
            gamma: self.gamma.rem_euclid(tau),
        })
    }
}

/// Index triple `(j, m, m')` of a rotation-matrix element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WignerIndex {
    /// Representation label.
    pub j: HalfInt,
    /// Row projection.
    pub m: HalfInt,
    /// Column projection.
    pub mprime: HalfInt,
}

impl WignerIndex {
    /// Validated constructor.
    pub fn new(j: HalfInt, m: HalfInt, mprime: HalfInt) -> Result<Self> {
        let idx = WignerIndex { j, m, mprime };
        if idx.is_valid() {
            Ok(idx)
        } else {
            Err(IsoError::Domain(format!("invalid Wigner index j={j}, m={m}, m'={mprime}")))
        }
    }

    /// Builds from doubled integers.
    pub fn from_twice(j2: i64, m2: i64, mp2: i64) -> Result<Self> {
        WignerIndex::new(HalfInt::from_twice(j2), HalfInt::from_twice(m2), HalfInt::from_twice(mp2))
    }

    /// True when `|m|, |m'| <= j` and `j - m`, `j - m'` are integers.
    pub fn is_valid(&self) -> bool {
        let (j, m, mp) = (self.j.twice_value, self.m.twice_value, self.mprime.twice_value);
        j >= 0 && m.abs() <= j && mp.abs() <= j && (j - m) % 2 == 0 && (j - mp) % 2 == 0
    }
}

const FACT_TABLE_LEN: usize = 171;

fn factorial_table() -> &'static [f64; FACT_TABLE_LEN] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[f64; FACT_TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0f64; FACT_TABLE_LEN];
        for n in 1..FACT_TABLE_LEN {
            t[n] = t[n - 1] * n as f64;
        }
        t
    })
}

/// `ln(n!)` for `n >= 0`.
pub fn ln_factorial(n: i64) -> f64 {
    if (n as usize) < FACT_TABLE_LEN {
        factorial_table()[n as usize].ln()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// One term of the Wigner sum: coefficient and powers of `cos(b/2)`, `sin(b/2)`.
#[derive(Clone, Copy, Debug)]
struct SumTerm {
    coeff: f64,
    cos_pow: i64,
    sin_pow: i64,
}

fn wigner_sum_terms(idx: &WignerIndex) -> Vec<SumTerm> {
    let j2 = idx.j.twice_value;
    let jpm = (j2 + idx.m.twice_value) / 2;
    let jmm = (j2 - idx.m.twice_value) / 2;
    let jpmp = (j2 + idx.mprime.twice_value) / 2;
    let jmmp = (j2 - idx.mprime.twice_value) / 2;
    let diff = (idx.m.twice_value - idx.mprime.twice_value) / 2;
    let k_min = 0.max(-diff);
    let k_max = jpmp.min(jmm);
    let largest = jpm.max(jmm).max(jpmp).max(jmmp);
    let direct = largest <= 40;
    let f = factorial_table();
    let mut out = Vec::with_capacity((k_max - k_min + 1).max(0) as usize);
    for k in k_min..=k_max {
        let (e1, e2, e3) = (jpmp - k, jmm - k, diff + k);
        let mag = if direct {
            (f[jpm as usize] * f[jmm as usize] * f[jpmp as usize] * f[jmmp as usize]).sqrt()
                / (f[e1 as usize] * f[k as usize] * f[e2 as usize] * f[e3 as usize])
        } else {
            (0.5 * (ln_factorial(jpm) + ln_factorial(jmm) + ln_factorial(jpmp) + ln_factorial(jmmp))
                - ln_factorial(e1)
                - ln_factorial(k)
                - ln_factorial(e2)
                - ln_factorial(e3))
            .exp()
        };
        let sign = if (k + diff).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        out.push(SumTerm { coeff: sign * mag, cos_pow: j2 - diff - 2 * k, sin_pow: diff + 2 * k });
    }
    out
}

fn powi(x: f64, n: i64) -> f64 {
    if n == 0 {
        1.0
    } else {
        x.powi(n as i32)
    }
}

/// Small Wigner function `d^j_{m m'}(beta)`.
pub fn small_d(idx: &WignerIndex, beta: f64) -> Result<f64> {
    if !idx.is_valid() {
        return Err(IsoError::Domain(format!("invalid Wigner index {idx:?}")));
    }
    let (c, s) = ((0.5 * beta).cos(), (0.5 * beta).sin());
    Ok(wigner_sum_terms(idx)
        .iter()
        .map(|t| t.coeff * powi(c, t.cos_pow) * powi(s, t.sin_pow))
        .sum())
}

/// Analytic derivative `d/dbeta d^j_{m m'}(beta)`.
///
/// Uses `d/db [c^p s^q] = -(p/2) c^(p-1) s^(q+1) + (q/2) c^(p+1) s^(q-1)` with
/// `c = cos(b/2)`, `s = sin(b/2)`.
pub fn small_d_deriv(idx: &WignerIndex, beta: f64) -> Result<f64> {
    if !idx.is_valid() {
        return Err(IsoError::Domain(format!("invalid Wigner index {idx:?}")));
    }
    let (c, s) = ((0.5 * beta).cos(), (0.5 * beta).sin());
    let mut acc = 0.0;
    for t in wigner_sum_terms(idx) {
        if t.cos_pow > 0 {
            acc -= 0.5 * t.cos_pow as f64 * t.coeff * powi(c, t.cos_pow - 1) * powi(s, t.sin_pow + 1);
        }
        if t.sin_pow > 0 {
            acc += 0.5 * t.sin_pow as f64 * t.coeff * powi(c, t.cos_pow + 1) * powi(s, t.sin_pow - 1);
        }
    }
    Ok(acc)
}

fn phase(mtwice: i64, angle: f64) -> C64 {
    C64::from_polar(1.0, -0.5 * mtwice as f64 * angle)
}

/// Rotation-matrix element `D^j_{m m'}(alpha, beta, gamma)`.
pub fn big_d(idx: &WignerIndex, angles: &EulerAngles) -> Result<C64> {
    let d = small_d(idx, angles.beta)?;
    Ok(phase(idx.m.twice_value, angles.alpha) * d * phase(idx.mprime.twice_value, angles.gamma))
}

/// Analytic `d/dbeta D^j_{m m'}(alpha, beta, gamma)`.
pub fn big_d_dbeta(idx: &WignerIndex, angles: &EulerAngles) -> Result<C64> {
    let d = small_d_deriv(idx, angles.beta)?;
    Ok(phase(idx.m.twice_value, angles.alpha) * d * phase(idx.mprime.twice_value, angles.gamma))
}

/// `D^j_{m m'}` with out-of-range indices mapped to exactly zero.
pub fn big_d_or_zero(j: HalfInt, m: HalfInt, mprime: HalfInt, angles: &EulerAngles) -> C64 {
    let idx = WignerIndex { j, m, mprime };
    if idx.is_valid() {
        big_d(&idx, angles).unwrap_or(C64::new(0.0, 0.0))
    } else {
        C64::new(0.0, 0.0)
    }
}

/// Spherical shorthand `D^j_{-m, sigma}(phi, theta, 0)` used by all wave functions.
///
/// Out-of-range labels give zero.
pub fn dsph(j: HalfInt, m: HalfInt, sigma: HalfInt, theta: f64, phi: f64) -> C64 {
    big_d_or_zero(j, -m, sigma, &EulerAngles::spherical(theta, phi))
}

/// `d/dtheta D^j_{-m, sigma}(phi, theta, 0)`; zero for out-of-range labels.
pub fn dsph_dtheta(j: HalfInt, m: HalfInt, sigma: HalfInt, theta: f64, phi: f64) -> C64 {
    let idx = WignerIndex { j, m: -m, mprime: sigma };
    if idx.is_valid() {
        big_d_dbeta(&idx, &EulerAngles::spherical(theta, phi)).unwrap_or(C64::new(0.0, 0.0))
    } else {
        C64::new(0.0, 0.0)
    }
}

/// Which polar endpoint a boundary value refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    /// `theta -> 0`.
    ThetaZero,
    /// `theta -> pi`.
    ThetaPi,
}

/// Limiting value of `D^j_{m m'}(phi, theta, 0)` at a pole.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryValue {
    /// Exactly zero.
    Zero,
    /// `sign * exp(i * winding * phi)`.
    Phase {
        /// Either `+1` or `-1`.
        sign: i8,
        /// Winding number in `phi`.
        winding: HalfInt,
    },
}

impl BoundaryValue {
    /// Complex value at azimuth `phi`.
    pub fn value(&self, phi: f64) -> C64 {
        match *self {
            BoundaryValue::Zero => C64::new(0.0, 0.0),
            BoundaryValue::Phase { sign, winding } => C64::from_polar(sign as f64, winding.value() * phi),
        }
    }

    /// Winding number, if nonzero.
    pub fn winding(&self) -> Option<HalfInt> {
        match *self {
            BoundaryValue::Zero => None,
            BoundaryValue::Phase { winding, .. } => Some(winding),
        }
    }
}

/// Exact limit of `D^j_{m m'}(phi, theta, 0)` at `theta = 0` or `theta = pi`.
///
/// `d(0) = delta_{m m'}` and `d(pi) = (-1)^(j-m') delta_{m,-m'}`.
pub fn boundary_value(idx: &WignerIndex, endpoint: Endpoint) -> Result<BoundaryValue> {
    if !idx.is_valid() {
        return Err(IsoError::Domain(format!("invalid Wigner index {idx:?}")));
    }
    let winding = -idx.m;
    Ok(match endpoint {
        Endpoint::ThetaZero if idx.m == idx.mprime => BoundaryValue::Phase { sign: 1, winding },
        Endpoint::ThetaPi if idx.m == -idx.mprime => {
            let e = (idx.j - idx.mprime).to_int()?;
            BoundaryValue::Phase { sign: if e.rem_euclid(2) == 0 { 1 } else { -1 }, winding }
        }
        _ => BoundaryValue::Zero,
    })
}

/// Residual of the derivative recursion
/// `d_b D_{m m'} = 1/2 sqrt((j+m')(j-m'+1)) e^{-ic} D_{m,m'-1} - 1/2 sqrt((j-m')(j+m'+1)) e^{ic} D_{m,m'+1}`.
pub fn recursion_residual_derivative(idx: &WignerIndex, angles: &EulerAngles) -> Result<f64> {
    recursion_residual_derivative_with(idx, angles, 1.0)
}

/// The derivative recursion with the `D_{m,m'-1}` term multiplied by
/// `lower_sign`. With `lower_sign = 1` this is [`recursion_residual_derivative`];
/// `-1` reproduces a sign error and serves as a fault-injection hook.
pub fn recursion_residual_derivative_with(idx: &WignerIndex, angles: &EulerAngles, lower_sign: f64) -> Result<f64> {
    let lhs = big_d_dbeta(idx, angles)?;
    let (lo, hi) = ladder_neighbours(idx, angles);
    Ok((lhs - (lo * lower_sign - hi)).norm())
}

/// Residual of the weight recursion
/// `(m - m' cos b)/sin b D_{m m'} = -1/2 sqrt((j+m')(j-m'+1)) e^{-ic} D_{m,m'-1} - 1/2 sqrt((j-m')(j+m'+1)) e^{ic} D_{m,m'+1}`.
pub fn recursion_residual_weight(idx: &WignerIndex, angles: &EulerAngles) -> Result<f64> {
    let sb = angles.beta.sin();
    if sb.abs() < 1e-12 {
        return Err(IsoError::Pole(format!("beta = {} is a pole; use boundary_value", angles.beta)));
    }
    let lhs = (idx.m.value() - idx.mprime.value() * angles.beta.cos()) / sb * big_d(idx, angles)?;
    let (lo, hi) = ladder_neighbours(idx, angles);
    Ok((lhs + lo + hi).norm())
}

/// The two recursion terms `1/2 a e^{-ic} D_{m,m'-1}` and `1/2 b e^{ic} D_{m,m'+1}`.
fn ladder_neighbours(idx: &WignerIndex, angles: &EulerAngles) -> (C64, C64) {
    let (j, mp) = (idx.j.value(), idx.mprime.value());
    let a = ((j + mp) * (j - mp + 1.0)).max(0.0).sqrt();
    let b = ((j - mp) * (j + mp + 1.0)).max(0.0).sqrt();
    let lo = 0.5 * a * C64::from_polar(1.0, -angles.gamma)
        * big_d_or_zero(idx.j, idx.m, idx.mprime - HalfInt::ONE, angles);
    let hi = 0.5 * b * C64::from_polar(1.0, angles.gamma)
        * big_d_or_zero(idx.j, idx.m, idx.mprime + HalfInt::ONE, angles);
    (lo, hi)
}

/// Maximum residual of the six integer-column relations used to separate the
/// doublet equation, with `D_s = D^j_{-m,s}(phi, theta, 0)`,
/// `nu = sqrt(j(j+1))` and `omega = sqrt((j-1)(j+2))`:
///
/// ```text
/// d_theta D_{-1} = (omega D_{-2} - nu D_0)/2      (m - cos)/sin D_{-1} = (omega D_{-2} + nu D_0)/2
/// d_theta D_0    = (nu D_{-1} - nu D_{+1})/2      m/sin D_0            = (nu D_{-1} + nu D_{+1})/2
/// d_theta D_{+1} = (nu D_0 - omega D_{+2})/2      (m + cos)/sin D_{+1} = (nu D_0 + omega D_{+2})/2
/// ```
pub fn column_recursion_residual(j: HalfInt, m: HalfInt, theta: f64, phi: f64) -> Result<f64> {
    if !j.is_integer() || j.twice_value < 2 {
        return Err(IsoError::Domain(format!("column relations need integer j >= 1, got {j}")));
    }
    let s = theta.sin();
    if s.abs() < 1e-12 {
        return Err(IsoError::Pole("theta at a pole".into()));
    }
    let jv = j.value();
    let nu = (jv * (jv + 1.0)).sqrt();
    let omega = ((jv - 1.0) * (jv + 2.0)).sqrt();
    let dd = |k: i64| dsph(j, m, HalfInt::int(k), theta, phi);
    let dt = |k: i64| dsph_dtheta(j, m, HalfInt::int(k), theta, phi);
    let (mv, c) = (m.value(), theta.cos());
    let res = [
        dt(-1) - 0.5 * (omega * dd(-2) - nu * dd(0)),
        (mv - c) / s * dd(-1) - 0.5 * (omega * dd(-2) + nu * dd(0)),
        dt(0) - 0.5 * (nu * dd(-1) - nu * dd(1)),
        mv / s * dd(0) - 0.5 * (nu * dd(-1) + nu * dd(1)),
        dt(1) - 0.5 * (nu * dd(0) - omega * dd(2)),
        (mv + c) / s * dd(1) - 0.5 * (nu * dd(0) + omega * dd(2)),
    ];
    Ok(res.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Branch selector for the half-angle coupling identities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfAngleBranch {
    /// `cos(b/2) e^{i(a+c)/2} D^j_{m+1/2, m'+1/2}` expansion.
    CosBranch,
    /// `sin(b/2) e^{i(a-c)/2} D^j_{m+1/2, m'-1/2}` expansion.
    SinBranch,
}

/// Residual of the half-angle coupling identity
///
/// ```text
/// cos(b/2) e^{i(a+c)/2} D^j_{m+1/2,m'+1/2}
///   = [sqrt((j+m+1/2)(j+m'+1/2)) D^{j-1/2}_{m m'} + sqrt((j-m+1/2)(j-m'+1/2)) D^{j+1/2}_{m m'}]/(2j+1)
/// sin(b/2) e^{i(a-c)/2} D^j_{m+1/2,m'-1/2}
///   = [-sqrt((j+m+1/2)(j-m'+1/2)) D^{j-1/2}_{m m'} + sqrt((j-m+1/2)(j+m'+1/2)) D^{j+1/2}_{m m'}]/(2j+1)
/// ```
///
/// Here `m`, `m'` are projections of `j -+ 1/2`; out-of-range elements vanish.
pub fn half_angle_coupling(
    j: HalfInt,
    m: HalfInt,
    mprime: HalfInt,
    angles: &EulerAngles,
    branch: HalfAngleBranch,
) -> Result<f64> {
    if j.twice_value < 1 || (j.twice_value - m.twice_value) % 2 == 0 || (j.twice_value - mprime.twice_value) % 2 == 0 {
        return Err(IsoError::Domain(format!("half-angle identity needs m, m' of j -+ 1/2 (j={j}, m={m}, m'={mprime})")));
    }
    let (jv, mv, mpv) = (j.value(), m.value(), mprime.value());
    let norm = 2.0 * jv + 1.0;
    let half = HalfInt::HALF;
    let (a, b, g) = (angles.alpha, angles.beta, angles.gamma);
    let lower = big_d_or_zero(j - half, m, mprime, angles);
    let upper = big_d_or_zero(j + half, m, mprime, angles);
    let sq = |x: f64| x.max(0.0).sqrt();
    let (lhs, rhs) = match branch {
        HalfAngleBranch::CosBranch => (
            (0.5 * b).cos() * C64::from_polar(1.0, 0.5 * (a + g)) * big_d_or_zero(j, m + half, mprime + half, angles),
            (sq((jv + mv + 0.5) * (jv + mpv + 0.5)) * lower + sq((jv - mv + 0.5) * (jv - mpv + 0.5)) * upper) / norm,
        ),
        HalfAngleBranch::SinBranch => (
            (0.5 * b).sin() * C64::from_polar(1.0, 0.5 * (a - g)) * big_d_or_zero(j, m + half, mprime - half, angles),
            (-sq((jv + mv + 0.5) * (jv - mpv + 0.5)) * lower + sq((jv - mv + 0.5) * (jv + mpv + 0.5)) * upper) / norm,
        ),
    };
    Ok((lhs - rhs).norm())
}

/// A printed cell of the boundary tables: zero, or a unit-modulus phase `exp(i w phi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrintedCell {
    /// Printed as `0`.
    Zero,
    /// Printed as `exp(i * winding * phi)`.
    Phase(HalfInt),
}

/// One row of the boundary tables for `D^j_{m, m'}(phi, theta, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    /// Table label, e.g. `"1a"`.
    pub table: &'static str,
    /// Column index `m'`.
    pub mprime: HalfInt,
    /// Representation label.
    pub j: HalfInt,
    /// Row index `m`.
    pub m: HalfInt,
    /// Entry at `theta = 0`.
    pub at_zero: PrintedCell,
    /// Entry at `theta = pi`.
    pub at_pi: PrintedCell,
}

/// The boundary tables exactly as printed in the reference text.
///
/// Every nonzero entry is printed as a pure phase with coefficient `+1`.
pub fn printed_tables() -> Vec<TableRow> {
    let mut rows = Vec::new();
    let specs: [(&'static str, i64, &[i64]); 6] = [
        ("1a", 1, &[1, 3]),
        ("1b", -1, &[1, 3]),
        ("2a", 2, &[2, 4]),
        ("2b", -2, &[2, 4]),
        ("3a", 3, &[3, 5]),
        ("3b", -3, &[3, 5]),
    ];
    for (name, mp2, js) in specs {
        for &j2 in js {
            for m2 in (-j2..=j2).step_by(2) {
                let at_zero = if m2 == mp2 { PrintedCell::Phase(HalfInt::from_twice(-m2)) } else { PrintedCell::Zero };
                let at_pi = if m2 == -mp2 { PrintedCell::Phase(HalfInt::from_twice(-m2)) } else { PrintedCell::Zero };
                rows.push(TableRow {
                    table: name,
                    mprime: HalfInt::from_twice(mp2),
                    j: HalfInt::from_twice(j2),
                    m: HalfInt::from_twice(m2),
                    at_zero,
                    at_pi,
                });
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn h(t: i64) -> HalfInt {
        HalfInt::from_twice(t)
    }

    #[test]
    fn spin_half_closed_forms() {
        let b = 0.83;
        let dpp = small_d(&WignerIndex::from_twice(1, 1, 1).unwrap(), b).unwrap();
        let dpm = small_d(&WignerIndex::from_twice(1, 1, -1).unwrap(), b).unwrap();
        let dmp = small_d(&WignerIndex::from_twice(1, -1, 1).unwrap(), b).unwrap();
        assert!((dpp - (b / 2.0).cos()).abs() < 1e-15);
        assert!((dpm + (b / 2.0).sin()).abs() < 1e-15);
        assert!((dmp - (b / 2.0).sin()).abs() < 1e-15);
    }

    #[test]
    fn spin_one_closed_forms() {
        // Independent oracle: the standard spin-1 matrix.
        let b: f64 = 1.234;
        let (c, s) = (b.cos(), b.sin());
        let expect = [
            (2, 2, (1.0 + c) / 2.0),
            (2, 0, -s / 2f64.sqrt()),
            (2, -2, (1.0 - c) / 2.0),
            (0, 0, c),
            (0, 2, s / 2f64.sqrt()),
            (-2, 2, (1.0 - c) / 2.0),
        ];
        for (m2, mp2, v) in expect {
            let got = small_d(&WignerIndex::from_twice(2, m2, mp2).unwrap(), b).unwrap();
            assert!((got - v).abs() < 1e-14, "m={m2} m'={mp2}: {got} vs {v}");
        }
    }

    #[test]
    fn scalar_is_constant() {
        let idx = WignerIndex::from_twice(0, 0, 0).unwrap();
        assert_eq!(small_d(&idx, 1.3).unwrap(), 1.0);
    }

    #[test]
    fn invalid_index_is_rejected() {
        assert!(WignerIndex::from_twice(1, 3, 1).is_err());
        assert!(WignerIndex::from_twice(2, 1, 0).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let idx = WignerIndex::from_twice(5, 1, -3).unwrap();
        let b = 0.77;
        let h = 1e-5;
        let fd = (small_d(&idx, b + h).unwrap() - small_d(&idx, b - h).unwrap()) / (2.0 * h);
        assert!((fd - small_d_deriv(&idx, b).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn boundary_values_match_direct_evaluation() {
        for j2 in 0..=7 {
            for m2 in (-j2..=j2).step_by(2) {
                for mp2 in (-j2..=j2).step_by(2) {
                    let idx = WignerIndex::from_twice(j2, m2, mp2).unwrap();
                    for (ep, beta) in [(Endpoint::ThetaZero, 0.0), (Endpoint::ThetaPi, PI)] {
                        let phi = 0.4;
                        let direct = big_d(&idx, &EulerAngles::spherical(beta, phi)).unwrap();
                        let bv = boundary_value(&idx, ep).unwrap().value(phi);
                        assert!((direct - bv).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn recursions_hold_at_sample_point() {
        let idx = WignerIndex::new(h(2), h(0), h(0)).unwrap();
        let ang = EulerAngles::new(0.3, 0.7, 0.0);
        assert!(recursion_residual_derivative(&idx, &ang).unwrap() < 1e-12);
        let idx = WignerIndex::new(h(2), h(2), h(0)).unwrap();
        let ang = EulerAngles::new(0.3, 1.1, 0.9);
        assert!(recursion_residual_weight(&idx, &ang).unwrap() < 1e-12);
        let idx = WignerIndex::new(h(3), h(1), h(-3)).unwrap();
        let ang = EulerAngles::new(0.1, 2.0, 0.5);
        assert!(recursion_residual_weight(&idx, &ang).unwrap() < 1e-12);
        assert!(recursion_residual_weight(&idx, &EulerAngles::new(0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn column_relations_hold() {
        for j in 1..=4 {
            for m in -j..=j {
                let r = column_recursion_residual(HalfInt::int(j), HalfInt::int(m), 0.9, 0.4).unwrap();
                assert!(r < 1e-12, "j={j} m={m}: {r}");
            }
        }
    }

    #[test]
    fn half_angle_identities() {
        let ang = EulerAngles::new(0.0, 0.9, 0.0);
        for br in [HalfAngleBranch::CosBranch, HalfAngleBranch::SinBranch] {
            assert!(half_angle_coupling(h(1), h(0), h(0), &ang, br).unwrap() < 1e-12);
        }
        let ang = EulerAngles::new(0.4, 2.1, 1.3);
        for j2 in [1, 3, 5] {
            for m2 in (-(j2 + 1)..=(j2 + 1)).step_by(2) {
                for mp2 in (-(j2 + 1)..=(j2 + 1)).step_by(2) {
                    for br in [HalfAngleBranch::CosBranch, HalfAngleBranch::SinBranch] {
                        let r = half_angle_coupling(h(j2), h(m2), h(mp2), &ang, br).unwrap();
                        assert!(r < 1e-12, "j={j2}/2 m={m2}/2 m'={mp2}/2 {br:?}: {r}");
                    }
                }
            }
        }
    }

    #[test]
    fn printed_tables_have_expected_shape() {
        let rows = printed_tables();
        assert_eq!(rows.len(), 6 + 6 + 8 + 8 + 10 + 10);
    }
}
