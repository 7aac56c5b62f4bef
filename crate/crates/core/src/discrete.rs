//! The composite inversion operator `N_A` of the doublet, its eigenproblem,
//! the chiral transformation `U(A)`, and the non-orthogonal bases and complex
//! expectation values that appear for complex `A`.
//!
//! `N_A` acts as `Psi(x) -> M(x) Psi(Px)` with `Px: (theta, phi) -> (pi - theta,
//! phi + pi)` and `M = pi_A (x) P_bisp`. The isotopic factor in the Schwinger
//! gauge is `pi_A = exp(-i A sigma_3) sigma_1`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    exp_i_sigma, gamma, gamma5, kron, max_abs, parity_bispinor_cartesian, parity_bispinor_spherical, pauli, re, Mat2,
    Mat4, Mat8, I, ONE, ZERO,
};
use crate::angular::{dyn8, DoubletSection, PointSection, SectionTerm};
use crate::error::{IsoError, Result};
use crate::gauge::{spinor_gauge_matrix, unit_radial, Gauge, Tetrad};
use crate::halfint::{parity_phase, HalfInt};
use crate::quadrature::SphereGrid;

/// The complex parameter `A = f + i g` labelling the family of inversion operators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiralParameter {
    pub a: C64,
}

impl ChiralParameter {
    /// Builds `A`, rejecting values for which `e^{iA}` is zero or not finite.
    pub fn new(a: C64) -> Result<Self> {
        let d = (I * a).exp();
        if !a.re.is_finite() || !a.im.is_finite() || !d.re.is_finite() || !d.im.is_finite() || d.norm() == 0.0 {
            return Err(IsoError::Domain(format!("e^(iA) must be finite and nonzero, got A = {a}")));
        }
        Ok(ChiralParameter { a })
    }

    /// Real `A`.
    pub fn real(f: f64) -> Result<Self> {
        Self::new(re(f))
    }

    /// `A = f + i g`.
    pub fn from_parts(f: f64, g: f64) -> Result<Self> {
        Self::new(C64::new(f, g))
    }

    /// `A = 0`.
    pub fn zero() -> Self {
        ChiralParameter { a: ZERO }
    }

    /// Real part `f`.
    pub fn f(&self) -> f64 {
        self.a.re
    }

    /// Imaginary part `g`.
    pub fn g(&self) -> f64 {
        self.a.im
    }

    /// `Delta = e^{iA}`.
    pub fn delta(&self) -> C64 {
        (I * self.a).exp()
    }

    /// `e^{i(A - A*)} = e^{-2g}`.
    pub fn modulus_factor(&self) -> f64 {
        (-2.0 * self.g()).exp()
    }
}

impl fmt::Display for ChiralParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.a.im >= 0.0 {
            write!(f, "{}+{}i", self.a.re, self.a.im)
        } else {
            write!(f, "{}-{}i", self.a.re, -self.a.im)
        }
    }
}

impl FromStr for ChiralParameter {
    type Err = IsoError;

    /// Parses `f`, `gi`, `f+gi` or `f-gi` (for example `0.5`, `-i`, `2+3i`, `1e-3-0.5i`).
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || IsoError::Parse(format!("cannot parse '{s}' as a complex number f+gi"));
        if t.is_empty() {
            return Err(bad());
        }
        let num = |x: &str| -> Result<f64> { x.parse::<f64>().map_err(|_| bad()) };
        let a = if let Some(body) = t.strip_suffix(['i', 'j']) {
            let bytes = body.as_bytes();
            let split = (1..bytes.len())
                .rev()
                .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
            let (re_part, im_part) = match split {
                Some(k) => (num(&body[..k])?, &body[k..]),
                None => (0.0, body),
            };
            let im = match im_part {
                "" | "+" => 1.0,
                "-" => -1.0,
                x => num(x)?,
            };
            C64::new(re_part, im)
        } else {
            C64::new(num(&t)?, 0.0)
        };
        ChiralParameter::new(a)
    }
}

/// Gauge, tetrad and parameter selecting one concrete `N_A`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteOperatorSpec {
    pub gauge: Gauge,
    pub tetrad: Tetrad,
    pub a: ChiralParameter,
}

impl DiscreteOperatorSpec {
    /// Schwinger gauge, spherical tetrad.
    pub fn schwinger(a: ChiralParameter) -> Self {
        DiscreteOperatorSpec { gauge: Gauge::Schwinger, tetrad: Tetrad::Spherical, a }
    }
}

/// Matrix factor of `N_A` at a point, always accompanied by the coordinate reflection.
#[derive(Clone, Debug, PartialEq)]
pub struct NOperator {
    pub isotopic: Mat2,
    pub bispinor: Mat4,
    /// `isotopic (x) bispinor`.
    pub matrix: Mat8,
    /// The operator also maps the argument by `(theta, phi) -> (pi - theta, phi + pi)`.
    pub reflects: bool,
}

/// The reflected point `(pi - theta, phi + pi)`.
pub fn reflect_point(theta: f64, phi: f64) -> (f64, f64) {
    (std::f64::consts::PI - theta, phi + std::f64::consts::PI)
}

/// Schwinger-gauge isotopic factor `exp(-i A sigma_3) sigma_1`.
pub fn pi_schwinger(a: &ChiralParameter) -> Mat2 {
    let d = a.delta();
    Mat2::new(ZERO, ONE / d, d, ZERO)
}

/// Isotopic factor of `N_A` in the given gauge at `(theta, phi)`.
///
/// Dirac: `[[0, -i e^{-i phi} e^{-iA}], [i e^{i phi} e^{iA}, 0]]`.
/// Cartesian: `(-i) exp(-i A sigma . n)`.
pub fn isotopic_factor(gauge: Gauge, a: &ChiralParameter, theta: f64, phi: f64) -> Mat2 {
    match gauge {
        Gauge::Schwinger => pi_schwinger(a),
        Gauge::Dirac => {
            let d = a.delta();
            let e = C64::from_polar(1.0, phi);
            Mat2::new(ZERO, -I / (e * d), I * e * d, ZERO)
        }
        Gauge::Cartesian => exp_i_sigma(-a.a, unit_radial(theta, phi)) * (-I),
    }
}

/// Bispinor factor of the reflection in the given tetrad.
pub fn bispinor_factor(tetrad: Tetrad) -> Mat4 {
    match tetrad {
        Tetrad::Spherical => parity_bispinor_spherical(),
        Tetrad::Cartesian => parity_bispinor_cartesian(),
    }
}

/// The matrix factor of `N_A` at `(theta, phi)`.
pub fn n_operator_matrix(spec: &DiscreteOperatorSpec, theta: f64, phi: f64) -> NOperator {
    let isotopic = isotopic_factor(spec.gauge, &spec.a, theta, phi);
    let bispinor = bispinor_factor(spec.tetrad);
    NOperator { matrix: kron(&isotopic, &bispinor), isotopic, bispinor, reflects: true }
}

/// The constant `c` with `M(x) M(Px) = c I`, so that `N_A^2 = c`.
///
/// The Schwinger gauge squares to `+1` in either tetrad. The Dirac-gauge
/// isotopic factor squares to `-1`, and so does the Cartesian bispinor factor
/// `i gamma^0`; the Cartesian isotopic factor carries `(-i)^2 = -1`.
pub fn involution_phase(gauge: Gauge, tetrad: Tetrad) -> f64 {
    let iso = match gauge {
        Gauge::Schwinger => 1.0,
        Gauge::Dirac | Gauge::Cartesian => -1.0,
    };
    let bisp = match tetrad {
        Tetrad::Spherical => 1.0,
        Tetrad::Cartesian => -1.0,
    };
    iso * bisp
}

/// `max |M(x) M(Px) - c I|` at one point, with `c` from [`involution_phase`].
pub fn involution_residual(spec: &DiscreteOperatorSpec, theta: f64, phi: f64) -> f64 {
    let (tr, pr) = reflect_point(theta, phi);
    let m = n_operator_matrix(spec, theta, phi).matrix * n_operator_matrix(spec, tr, pr).matrix;
    max_abs(&(m - Mat8::identity() * re(involution_phase(spec.gauge, spec.tetrad))))
}

/// `N_A` applied to a pointwise section at `(theta, phi)`.
pub fn apply_n_point(spec: &DiscreteOperatorSpec, f: &PointSection<'_>, theta: f64, phi: f64) -> Result<Vec<C64>> {
    let (tr, pr) = reflect_point(theta, phi);
    let v = f(tr, pr);
    let n = n_operator_matrix(spec, theta, phi);
    let dim = v.len();
    let m: DMatrix<C64> = match dim {
        8 => dyn8(&n.matrix),
        4 => DMatrix::from_fn(4, 4, |r, c| n.bispinor[(r, c)]),
        2 => DMatrix::from_fn(2, 2, |r, c| n.isotopic[(r, c)]),
        _ => return Err(IsoError::Domain(format!("N_A acts on 2, 4 or 8 components, got {dim}"))),
    };
    Ok((m * nalgebra::DVector::from_vec(v)).iter().copied().collect())
}

/// The coordinate reflection on a D-function expansion:
/// `D^j_{-m,sigma}(Px) = e^{i pi j} D^j_{-m,-sigma}(x)`.
pub fn reflect_section(s: &DoubletSection) -> DoubletSection {
    let terms = s
        .terms
        .iter()
        .map(|t| SectionTerm { sigma: -t.sigma, coeff: t.coeff * parity_phase(t.j), ..*t })
        .collect();
    DoubletSection { dim: s.dim, terms }
}

/// Exact action of the Schwinger-gauge, spherical-tetrad `N_A` on an
/// 8-component expansion.
pub fn apply_n_section(a: &ChiralParameter, s: &DoubletSection) -> Result<DoubletSection> {
    let m = kron(&pi_schwinger(a), &parity_bispinor_spherical());
    reflect_section(s).apply_matrix(&dyn8(&m))
}

/// The eigenvalue and linkage `g_k = coeff * f_l` of an `N_A` eigenstate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Linkage {
    /// Eigenvalue `N`.
    pub eigenvalue: C64,
    /// Triples `(k, l, c)` meaning `g_{k+1} = c f_{l+1}`.
    pub links: Vec<(usize, usize, C64)>,
}

impl Linkage {
    /// The `g` amplitudes implied by `f`; unlinked entries are zero.
    pub fn g_from_f(&self, f: &[C64; 4]) -> [C64; 4] {
        let mut g = [ZERO; 4];
        for &(k, l, c) in &self.links {
            g[k] = c * f[l];
        }
        g
    }

    /// 4x4 matrix `L` with `g = L f`.
    pub fn matrix(&self) -> Mat4 {
        let mut m = Mat4::zeros();
        for &(k, l, c) in &self.links {
            m[(k, l)] = c;
        }
        m
    }
}

/// Eigenvalue `N = delta (-1)^{j+1}` and the linkage `g = delta e^{iA} (f4, f3, f2, f1)`.
/// At `j = 0` only `g1 = delta e^{iA} f4` and `g3 = delta e^{iA} f2` survive.
pub fn eigen_constraints(j: HalfInt, delta: i8, a: &ChiralParameter) -> Result<Linkage> {
    if delta != 1 && delta != -1 {
        return Err(IsoError::Domain(format!("delta must be +1 or -1, got {delta}")));
    }
    if j < HalfInt::ZERO || !j.is_integer() {
        return Err(IsoError::Domain(format!("doublet states need integer j >= 0, got {j}")));
    }
    let c = a.delta() * f64::from(delta);
    let eigenvalue = parity_phase(j + HalfInt::ONE) * f64::from(delta);
    let links = if j == HalfInt::ZERO {
        vec![(0, 3, c), (2, 1, c)]
    } else {
        vec![(0, 3, c), (1, 2, c), (2, 1, c), (3, 0, c)]
    };
    Ok(Linkage { eigenvalue, links })
}

/// Angular part of an `N_A` eigenstate with free amplitudes `f`.
pub fn eigen_section(j: HalfInt, m: HalfInt, delta: i8, a: &ChiralParameter, f: [C64; 4]) -> Result<DoubletSection> {
    let l = eigen_constraints(j, delta, a)?;
    let mut f = f;
    if j == HalfInt::ZERO {
        f[0] = ZERO;
        f[2] = ZERO;
    }
    Ok(DoubletSection::ansatz(j, m, f, l.g_from_f(&f)))
}

/// Isotopic matrix of the chiral transformation `U(A)`.
///
/// Schwinger and Dirac: `diag(1, e^{iA})`. Cartesian: `e^{iA/2} exp(-i (A/2) sigma . n)`.
pub fn chiral_u(a: &ChiralParameter, gauge: Gauge, theta: f64, phi: f64) -> Mat2 {
    match gauge {
        Gauge::Schwinger | Gauge::Dirac => Mat2::new(ONE, ZERO, ZERO, a.delta()),
        Gauge::Cartesian => exp_i_sigma(-a.a * 0.5, unit_radial(theta, phi)) * (I * a.a * 0.5).exp(),
    }
}

fn inverse2(m: &Mat2) -> Result<Mat2> {
    m.try_inverse().ok_or_else(|| IsoError::Domain("singular isotopic matrix".into()))
}

/// `max |U(x) N(x) U(Px)^{-1} - N_A(x)|` for the isotopic factors at one point.
pub fn conjugation_residual(a: &ChiralParameter, gauge: Gauge, theta: f64, phi: f64) -> Result<f64> {
    let (tr, pr) = reflect_point(theta, phi);
    let n0 = isotopic_factor(gauge, &ChiralParameter::zero(), theta, phi);
    let lhs = chiral_u(a, gauge, theta, phi) * n0 * inverse2(&chiral_u(a, gauge, tr, pr))?;
    Ok(max_abs(&(lhs - isotopic_factor(gauge, a, theta, phi))))
}

/// `max |B^{-1}(x) pi_S B(Px) - pi_C(x)|`: the Cartesian factor obtained by
/// conjugating the Schwinger one with the spinor gauge matrix.
pub fn gauge_covariance_residual(a: &ChiralParameter, theta: f64, phi: f64) -> Result<f64> {
    let (tr, pr) = reflect_point(theta, phi);
    let b = spinor_gauge_matrix(theta, phi, 1.0);
    let bp = spinor_gauge_matrix(tr, pr, 1.0);
    let lhs = inverse2(&b)? * pi_schwinger(a) * bp;
    Ok(max_abs(&(lhs - isotopic_factor(Gauge::Cartesian, a, theta, phi))))
}

/// Same check for the Dirac gauge with `Psi^D = diag(e^{-i phi/2}, e^{i phi/2}) Psi^S`.
pub fn dirac_covariance_residual(a: &ChiralParameter, theta: f64, phi: f64) -> Result<f64> {
    let (_, pr) = reflect_point(theta, phi);
    let u = |p: f64| Mat2::new(C64::from_polar(1.0, -p / 2.0), ZERO, ZERO, C64::from_polar(1.0, p / 2.0));
    let lhs = u(phi) * pi_schwinger(a) * inverse2(&u(pr))?;
    Ok(max_abs(&(lhs - isotopic_factor(Gauge::Dirac, a, theta, phi))))
}

/// Coefficients of `Psi^A_delta` over the `A = 0` states `{Psi_{+1}, Psi_{-1}}`:
/// `((1 + delta e^{iA})/2, (1 - delta e^{iA})/2)`.
pub fn basis_change(a: &ChiralParameter, delta: i8) -> [C64; 2] {
    let d = a.delta() * f64::from(delta);
    [(ONE + d) * 0.5, (ONE - d) * 0.5]
}

/// Coefficients of the `A = 0` state `Psi_{delta}` over `{Psi^A_{+1}, Psi^A_{-1}}`:
/// `((1 + delta e^{-iA})/2, (1 - delta e^{-iA})/2)`.
pub fn basis_change_inverse(a: &ChiralParameter, delta: i8) -> [C64; 2] {
    let d = f64::from(delta) / a.delta();
    [(ONE + d) * 0.5, (ONE - d) * 0.5]
}

/// `<Psi^A_{delta1}, Psi^A_{delta2}>` relative to the orthonormal `A = 0` basis:
/// `(1 + e^{i(A - A*)})/2` for equal labels and `(1 - e^{i(A - A*)})/2` otherwise.
pub fn overlap(a: &ChiralParameter, delta1: i8, delta2: i8) -> C64 {
    let e = a.modulus_factor();
    if delta1 == delta2 {
        re((1.0 + e) / 2.0)
    } else {
        re((1.0 - e) / 2.0)
    }
}

/// Both adjoint defects of `N_A` on a pair of sections.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjointDefect {
    /// `<N_A Phi, Psi> - <Phi, e^{i(A-A*) sigma_3} N_A Psi>`.
    pub corrected: C64,
    /// `<N_A Phi, Psi> - <Phi, N_A Psi>`.
    pub plain: C64,
}

/// Computes the adjoint defects by quadrature on `grid`.
pub fn adjoint_defect(
    a: &ChiralParameter,
    phi_s: &DoubletSection,
    psi_s: &DoubletSection,
    grid: &SphereGrid,
) -> Result<AdjointDefect> {
    let n_phi = apply_n_section(a, phi_s)?;
    let n_psi = apply_n_section(a, psi_s)?;
    let e = (I * (a.a - a.a.conj())).exp();
    let twist = Mat2::new(e, ZERO, ZERO, ONE / e);
    let twisted = n_psi.apply_matrix(&dyn8(&kron(&twist, &Mat4::identity())))?;
    let lhs = n_phi.inner(psi_s, grid);
    Ok(AdjointDefect { corrected: lhs - phi_s.inner(&twisted, grid), plain: lhs - phi_s.inner(&n_psi, grid) })
}

/// Which of the four closed-form regimes an `A` belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectationCase {
    /// `f = 0, g = 0`.
    Trivial,
    /// `g = 0, f != 0`: real `A`.
    RealA,
    /// `f = 0, g != 0`: purely imaginary `A`.
    ImaginaryA,
    /// Both parts nonzero.
    General,
}

/// Classifies `A` into the expectation-value regimes.
pub fn expectation_case(a: &ChiralParameter) -> ExpectationCase {
    match (a.f() == 0.0, a.g() == 0.0) {
        (true, true) => ExpectationCase::Trivial,
        (false, true) => ExpectationCase::RealA,
        (true, false) => ExpectationCase::ImaginaryA,
        (false, false) => ExpectationCase::General,
    }
}

/// `(-1)^{j+1}` read as `e^{i pi (j+1)}`.
pub fn parity_sign(j: HalfInt) -> C64 {
    parity_phase(j + HalfInt::ONE)
}

/// Closed-form `<Psi | N_A | Psi>` for
/// `Psi = cos(Gamma) e^{i alpha} Psi_{+1} + sin(Gamma) e^{i beta} Psi_{-1}`:
/// `(-1)^{j+1} (rho cosh g + i sigma sinh g)`.
pub fn expectation_n(a: &ChiralParameter, gamma_: f64, alpha: f64, beta: f64, j: HalfInt) -> C64 {
    let (f, g) = (a.f(), a.g());
    let (c2, s2) = ((2.0 * gamma_).cos(), (2.0 * gamma_).sin());
    let sab = (alpha - beta).sin();
    let rho = c2 * f.cos() + s2 * f.sin() * sab;
    let sigma = -c2 * f.sin() + s2 * f.cos() * sab;
    parity_sign(j) * C64::new(rho * g.cosh(), sigma * g.sinh())
}

/// `<Psi | N_A | Psi>` from the coefficients `(m, n)` of `Psi` over the
/// non-orthogonal basis `{Psi^A_{+1}, Psi^A_{-1}}`:
/// `(-1)^{j+1} [(|m|^2 - |n|^2)(1 + e^{i(A-A*)})/2 + (n* m - m* n)(1 - e^{i(A-A*)})/2]`.
pub fn expectation_from_coefficients(a: &ChiralParameter, m: C64, n: C64, j: HalfInt) -> C64 {
    let same = overlap(a, 1, 1);
    let cross = overlap(a, 1, -1);
    parity_sign(j) * (re(m.norm_sqr() - n.norm_sqr()) * same + (n.conj() * m - m.conj() * n) * cross)
}

/// Coefficients over `{Psi^A_{+1}, Psi^A_{-1}}` of a state given over the `A = 0` basis.
pub fn to_a_basis(a: &ChiralParameter, c_plus: C64, c_minus: C64) -> [C64; 2] {
    let p = basis_change_inverse(a, 1);
    let q = basis_change_inverse(a, -1);
    [c_plus * p[0] + c_minus * q[0], c_plus * p[1] + c_minus * q[1]]
}

/// One row of the expectation-value case table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationRow {
    pub case: ExpectationCase,
    pub a: ChiralParameter,
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub j: HalfInt,
    pub value: C64,
}

/// Representative evaluations of the four regimes at fixed `(Gamma, alpha, beta, j)`.
pub fn expectation_table(gamma_: f64, alpha: f64, beta: f64, j: HalfInt) -> Vec<ExpectationRow> {
    [(0.0, 0.0), (0.7, 0.0), (0.0, 0.4), (0.7, 0.4)]
        .into_iter()
        .map(|(f, g)| {
            let a = ChiralParameter { a: C64::new(f, g) };
            ExpectationRow {
                case: expectation_case(&a),
                a,
                gamma: gamma_,
                alpha,
                beta,
                j,
                value: expectation_n(&a, gamma_, alpha, beta, j),
            }
        })
        .collect()
}

/// Result of transporting a massless 4-component state by `diag(I, z I)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MasslessAnalogue {
    /// `diag(I, z I)` applied to the input section.
    pub section: DoubletSection,
    /// `(z + 1/z)/2 (-gamma^5 gamma^1) + (z - 1/z)/2 (-gamma^1)`, paired with the reflection.
    pub operator: Mat4,
    /// `max |operator - diag(I, zI) (-gamma^5 gamma^1) diag(I, zI)^{-1}|`.
    pub conjugation_residual: f64,
}

/// Chiral transformation of a 4-component massless state and the
/// correspondingly conjugated inversion operator.
pub fn massless_chiral_analogue(z: C64, state: &DoubletSection) -> Result<MasslessAnalogue> {
    if z.norm() == 0.0 || !z.re.is_finite() || !z.im.is_finite() {
        return Err(IsoError::Domain(format!("z must be finite and nonzero, got {z}")));
    }
    if state.dim != 4 {
        return Err(IsoError::Domain(format!("expected a 4-component section, got {}", state.dim)));
    }
    let p = parity_bispinor_spherical();
    let operator = p * ((z + ONE / z) * 0.5) + (-gamma(1)) * ((z - ONE / z) * 0.5);
    let d = Mat4::from_diagonal(&nalgebra::Vector4::new(ONE, ONE, z, z));
    let dinv = Mat4::from_diagonal(&nalgebra::Vector4::new(ONE, ONE, ONE / z, ONE / z));
    let conjugation_residual = max_abs(&(operator - d * p * dinv));
    let section = state.apply_matrix(&DMatrix::from_fn(4, 4, |r, c| d[(r, c)]))?;
    Ok(MasslessAnalogue { section, operator, conjugation_residual })
}

/// `max |(8.4b form) - e^{i A gamma^5} (-gamma^5 gamma^1)|` with `z = e^{iA}`.
pub fn chiral_exponential_residual(a: C64) -> f64 {
    let z = (I * a).exp();
    let p = parity_bispinor_spherical();
    let op = p * ((z + ONE / z) * 0.5) + (-gamma(1)) * ((z - ONE / z) * 0.5);
    let exp5 = Mat4::identity() * a.cos() + gamma5() * (I * a.sin());
    max_abs(&(op - exp5 * p))
}

/// Exact action of a constant 4x4 operator combined with the reflection on a 4-component section.
pub fn apply_bispinor_reflection(op: &Mat4, s: &DoubletSection) -> Result<DoubletSection> {
    reflect_section(s).apply_matrix(&DMatrix::from_fn(4, 4, |r, c| op[(r, c)]))
}

/// Free massless 4-component state `(f1 D_{-1/2}, f2 D_{1/2}, f2 D_{-1/2}, f1 D_{1/2})`
/// that is an eigenstate of `(-gamma^5 gamma^1) P` with eigenvalue `e^{i pi (j+1)}`.
pub fn massless_parity_state(j: HalfInt, m: HalfInt, f1: C64, f2: C64) -> Result<DoubletSection> {
    if j.is_integer() {
        return Err(IsoError::Domain(format!("a bispinor state needs half-integer j, got {j}")));
    }
    let h = HalfInt::HALF;
    let mut s = DoubletSection::zero(4);
    s.push(0, j, m, -h, f1);
    s.push(1, j, m, h, f2);
    s.push(2, j, m, -h, f2);
    s.push(3, j, m, h, f1);
    Ok(s)
}

/// `sigma_3` for the isotopic space, exposed for callers forming twisted products.
pub fn isotopic_sigma3() -> Mat2 {
    pauli(3)
}
