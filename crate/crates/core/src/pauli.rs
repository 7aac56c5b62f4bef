//! The Pauli criterion for spherical functions with an extra `lambda` term in
//! the momentum operators.
//!
//! With `J_pm = e^{pm i phi} [pm d_theta + i cot(theta) d_phi + lambda / sin(theta)]`
//! the lowest-weight function obtained by lowering `Phi_{jj}` must itself be
//! annihilated by `J_-`. This holds only for half-integer `lambda` and
//! `j = |lambda|, |lambda| + 1, ...`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{IsoError, Result};
use crate::halfint::HalfInt;
use crate::wigner::dsph;

/// Why a `(j, lambda)` pair was accepted or rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PauliReason {
    /// The pair is allowed.
    Ok,
    /// `2 lambda` is not an integer.
    LambdaNotHalfInteger,
    /// `j < |lambda|`.
    JBelowFloor,
    /// `j - |lambda|` is not an integer.
    JLambdaOffsetNotInteger,
}

/// Outcome of the Pauli criterion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliVerdict {
    /// True iff `reason == Ok`.
    pub allowed: bool,
    /// Classification of the outcome.
    pub reason: PauliReason,
}

impl PauliVerdict {
    fn from_reason(reason: PauliReason) -> Self {
        PauliVerdict { allowed: reason == PauliReason::Ok, reason }
    }
}

/// Applies the Pauli criterion to `(j, lambda)`; `lambda` may be any real number.
pub fn check_pauli(j: HalfInt, lambda: f64) -> PauliVerdict {
    let Ok(lam) = HalfInt::from_f64(lambda) else {
        return PauliVerdict::from_reason(PauliReason::LambdaNotHalfInteger);
    };
    let lam = lam.abs();
    if j < lam {
        return PauliVerdict::from_reason(PauliReason::JBelowFloor);
    }
    if !(j - lam).is_integer() {
        return PauliVerdict::from_reason(PauliReason::JLambdaOffsetNotInteger);
    }
    PauliVerdict::from_reason(PauliReason::Ok)
}

/// The first `count` allowed values `|lambda|, |lambda| + 1, ...`.
pub fn allowed_j_values(lambda: f64, count: usize) -> Result<Vec<HalfInt>> {
    let lam = HalfInt::from_f64(lambda)
        .map_err(|_| IsoError::Domain(format!("lambda = {lambda} is not a multiple of 1/2")))?
        .abs();
    Ok((0..count as i64).map(|k| lam + HalfInt::int(k)).collect())
}

/// Allowed `j` for the isotopic doublet, whose spinor-isospin weights are
/// `lambda in {-1, 0, +1}`: every non-negative integer.
pub fn doublet_allowed_j(count: usize) -> Vec<HalfInt> {
    (0..count as i64).map(HalfInt::int).collect()
}

/// Allowed `j` for a spin-1/2 particle in an Abelian monopole field with
/// `lambda = eg -+ 1/2`: the union of both ladders, `|eg| - 1/2, |eg| + 1/2, ...`.
pub fn abelian_allowed_j(eg: HalfInt, count: usize) -> Result<Vec<HalfInt>> {
    let l1 = allowed_j_values((eg + HalfInt::HALF).value(), count)?;
    let l2 = allowed_j_values((eg - HalfInt::HALF).value(), count)?;
    let mut all: Vec<HalfInt> = l1.into_iter().chain(l2).collect();
    all.sort();
    all.dedup();
    all.truncate(count);
    Ok(all)
}

/// True when both `lambda = eg + 1/2` and `lambda = eg - 1/2` admit some `j`,
/// which happens iff `2 eg` is an integer.
pub fn charge_quantization_admits(eg: f64) -> bool {
    let (l1, l2) = (eg + 0.5, eg - 0.5);
    match (HalfInt::from_f64(l1), HalfInt::from_f64(l2)) {
        (Ok(a), Ok(b)) => {
            let j = a.abs().max(b.abs());
            check_pauli(j, l1).allowed && check_pauli(j, l2).allowed
        }
        _ => false,
    }
}

fn falling(a: f64, k: u32) -> f64 {
    (0..k).map(|i| a - i as f64).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product()
}

/// `(d/dc)^n [(1 + c)^a (1 - c)^b]` by the Leibniz rule.
fn leibniz(a: f64, b: f64, n: u32, c: f64) -> f64 {
    (0..=n)
        .map(|i| {
            let fa = falling(a, i);
            let fb = falling(b, n - i);
            if fa == 0.0 || fb == 0.0 {
                return 0.0;
            }
            let sign = if (n - i).is_multiple_of(2) { 1.0 } else { -1.0 };
            binomial(n, i) * fa * sign * fb * (1.0 + c).powf(a - i as f64) * (1.0 - c).powf(b - (n - i) as f64)
        })
        .sum()
}

/// The unnormalized closed form obtained by lowering `Phi_{jj}` a total of
/// `n` times, `m = j - n`:
/// `g(theta) = sin^{-m} ((1 - c)/(1 + c))^{lambda/2} (d/dc)^n [(1+c)^{j+lambda} (1-c)^{j-lambda}]`,
/// together with its analytic `theta` derivative.
fn lowered_profile(j: f64, lambda: f64, n: u32, theta: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    let m = j - n as f64;
    let (a, b) = (j + lambda, j - lambda);
    let q = ((1.0 - c) / (1.0 + c)).powf(0.5 * lambda);
    let h = leibniz(a, b, n, c);
    let h1 = leibniz(a, b, n + 1, c);
    let sm = s.powf(-m);
    let g = sm * q * h;
    // Product rule: d sin^{-m} = -m c sin^{-m-1}, d q = lambda q / sin, d h = -sin h'.
    let dg = -m * c * s.powf(-m - 1.0) * q * h + sm * (lambda / s) * q * h - sm * q * s * h1;
    (g, dg)
}

/// `J_-` applied to `e^{i m phi} g(theta)`: `e^{i(m-1)phi} [-g' - m cot g + lambda g / sin]`.
fn lower_once(m: f64, lambda: f64, g: f64, dg: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    -dg - m * c / s * g + lambda / s * g
}

/// Polar angles used for the annihilation test; the poles are excluded.
fn probe_thetas() -> Vec<f64> {
    (1..=63).map(|k| std::f64::consts::PI * k as f64 / 64.0).collect()
}

/// Maximum over a polar grid of `|J_- Phi_{j,m_low}| / max |Phi_{j,m_low}|`, where
/// `Phi_{j,m_low}` results from lowering `Phi_{jj}` `floor(2j)` times.
///
/// For half-integer `j` this is the lowest-weight test `J_- Phi_{j,-j} = 0`.
/// Real `j`, `lambda` are accepted so that criterion-violating trials can be probed.
pub fn lowering_annihilation_residual(j: f64, lambda: f64) -> f64 {
    let n = (2.0 * j + 1e-12).floor().max(0.0) as u32;
    let m = j - n as f64;
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for t in probe_thetas() {
        let (g, dg) = lowered_profile(j, lambda, n, t);
        let r = lower_once(m, lambda, g, dg, t);
        num = num.max(r.abs());
        den = den.max(g.abs());
    }
    if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Normalization `N^lambda_{jm}` of the closed-form functions, via log-Gamma.
pub fn phi_normalization(j: HalfInt, m: HalfInt, lambda: HalfInt) -> f64 {
    let (jv, mv, lv) = (j.value(), m.value(), lambda.value());
    let ln = 0.5
        * ((2.0 * jv + 1.0).ln() + ln_gamma(jv + mv + 1.0)
            - (2.0f64).ln()
            - ln_gamma(jv - mv + 1.0)
            - ln_gamma(jv + lv + 1.0)
            - ln_gamma(jv - lv + 1.0));
    ln.exp() / ((2.0 * std::f64::consts::PI).sqrt() * 2f64.powf(jv))
}

/// A closed-form spherical function `Phi^lambda_{jm}` for an allowed pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiFunction {
    /// Weight.
    pub j: HalfInt,
    /// Projection.
    pub m: HalfInt,
    /// The `lambda` term.
    pub lambda: HalfInt,
    norm: f64,
}

impl PhiFunction {
    /// Value at `(theta, phi)`, away from the poles.
    pub fn eval(&self, theta: f64, phi: f64) -> Result<C64> {
        if theta.sin().abs() < 1e-12 {
            return Err(IsoError::Pole("closed-form Phi evaluated at a pole".into()));
        }
        let n = (self.j - self.m).to_int()? as u32;
        let (g, _) = lowered_profile(self.j.value(), self.lambda.value(), n, theta);
        Ok(C64::from_polar(self.norm * g, self.m.value() * phi))
    }

    /// The same function through the rotation matrices:
    /// `sqrt((2j+1)/4 pi) (-1)^{j-m} D^j_{-m,-lambda}(phi, theta, 0)`.
    pub fn eval_via_wigner(&self, theta: f64, phi: f64) -> C64 {
        let sign = if (self.j - self.m).twice_value.rem_euclid(4) == 0 { 1.0 } else { -1.0 };
        let scale = ((2.0 * self.j.value() + 1.0) / (4.0 * std::f64::consts::PI)).sqrt();
        sign * scale * dsph(self.j, self.m, -self.lambda, theta, phi)
    }
}

/// Builds `Phi^lambda_{jm}`; rejects pairs that fail the criterion.
pub fn build_phi(j: HalfInt, m: HalfInt, lambda: HalfInt) -> Result<PhiFunction> {
    let verdict = check_pauli(j, lambda.value());
    if !verdict.allowed {
        return Err(IsoError::Criterion(format!("(j={j}, lambda={lambda}) rejected: {:?}", verdict.reason)));
    }
    if m.abs() > j || !(j - m).is_integer() {
        return Err(IsoError::Domain(format!("m={m} is not a projection of j={j}")));
    }
    Ok(PhiFunction { j, m, lambda, norm: phi_normalization(j, m, lambda) })
}
