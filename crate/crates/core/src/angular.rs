//! Total angular momentum, the angular operator `Sigma_{theta phi}`, the
//! isotopic mixing term, the `K` operator and the full Dirac operator of the
//! doublet in the Schwinger gauge and spherical tetrad.
//!
//! Sections are finite sums of terms `c * D^j_{-m, sigma}(phi, theta, 0)` placed
//! in individual components. Operators act exactly on these expansions; the
//! `*_fd` functions apply the same operators as differential expressions by
//! finite differences and serve as independent cross-checks.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::{gamma, i_sigma12, isospin, kron, pauli, re, Mat4, Mat8, I, ONE, ZERO};
use crate::error::{IsoError, Result};
use crate::gauge::{Gauge, ProfileFunctions, Tetrad};
use crate::halfint::HalfInt;
use crate::quadrature::{derivative4, SphereGrid};
use crate::wigner::dsph;

/// The term added to the orbital momentum in `J_{1,2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaTerm {
    /// A single function with constant `lambda`.
    Scalar(f64),
    /// Bispinor in an Abelian monopole field: `i sigma^12 - eg`.
    SpinorMonopole(f64),
    /// Isotopic doublet of bispinors: `i sigma^12 + t^3`.
    Doublet,
}

/// A total-momentum operator `J_1 = l_1 + Lambda cos(phi)/sin(theta)`,
/// `J_2 = l_2 + Lambda sin(phi)/sin(theta)`, `J_3 = l_3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumSpec {
    pub lambda_term: LambdaTerm,
    pub gauge: Gauge,
    pub tetrad: Tetrad,
}

impl MomentumSpec {
    /// Scalar operator with a constant `lambda`.
    pub fn scalar(lambda: f64) -> Self {
        MomentumSpec { lambda_term: LambdaTerm::Scalar(lambda), gauge: Gauge::Schwinger, tetrad: Tetrad::Spherical }
    }

    /// Bispinor in an Abelian monopole field with charge product `eg`.
    pub fn spinor_monopole(eg: f64) -> Self {
        MomentumSpec {
            lambda_term: LambdaTerm::SpinorMonopole(eg),
            gauge: Gauge::Schwinger,
            tetrad: Tetrad::Spherical,
        }
    }

    /// The doublet operator in the Schwinger gauge and spherical tetrad.
    pub fn doublet() -> Self {
        MomentumSpec { lambda_term: LambdaTerm::Doublet, gauge: Gauge::Schwinger, tetrad: Tetrad::Spherical }
    }

    /// Number of components acted on: 1, 4 or 8.
    pub fn dim(&self) -> usize {
        match self.lambda_term {
            LambdaTerm::Scalar(_) => 1,
            LambdaTerm::SpinorMonopole(_) => 4,
            LambdaTerm::Doublet => 8,
        }
    }

    /// The diagonal value of `Lambda` on a component.
    pub fn lambda(&self, component: usize) -> f64 {
        let s12 = |k: usize| if k.is_multiple_of(2) { 0.5 } else { -0.5 };
        match self.lambda_term {
            LambdaTerm::Scalar(l) => l,
            LambdaTerm::SpinorMonopole(eg) => s12(component) - eg,
            LambdaTerm::Doublet => s12(component % 4) + if component < 4 { 0.5 } else { -0.5 },
        }
    }

    fn check_frame(&self) -> Result<()> {
        if self.tetrad != Tetrad::Spherical {
            return Err(IsoError::Frame("momentum operators are implemented in the spherical tetrad".into()));
        }
        if self.lambda_term == LambdaTerm::Doublet && self.gauge != Gauge::Schwinger {
            return Err(IsoError::Frame("doublet momentum operator requires the Schwinger gauge".into()));
        }
        Ok(())
    }
}

/// Cartesian component of the momentum operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// One basis term `coeff * D^j_{-m, sigma}(phi, theta, 0)` in a component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionTerm {
    pub component: usize,
    pub j: HalfInt,
    pub m: HalfInt,
    pub sigma: HalfInt,
    pub coeff: C64,
}

/// A multi-component function on the sphere given by its D-function expansion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubletSection {
    pub dim: usize,
    pub terms: Vec<SectionTerm>,
}

/// D-index pattern of the doublet ansatz, component by component.
pub const ANSATZ_SIGMA: [i64; 8] = [-1, 0, -1, 0, 0, 1, 0, 1];

fn d_valid(j: HalfInt, m: HalfInt, sigma: HalfInt) -> bool {
    m.abs() <= j && sigma.abs() <= j && (j - m).is_integer() && (j - sigma).is_integer()
}

impl DoubletSection {
    /// The zero section with `dim` components.
    pub fn zero(dim: usize) -> Self {
        DoubletSection { dim, terms: Vec::new() }
    }

    /// Adds a term; terms with out-of-range D labels are dropped (they vanish).
    pub fn push(&mut self, component: usize, j: HalfInt, m: HalfInt, sigma: HalfInt, coeff: C64) {
        assert!(component < self.dim, "component {component} out of range");
        if d_valid(j, m, sigma) {
            self.terms.push(SectionTerm { component, j, m, sigma, coeff });
        }
    }

    /// The doublet ansatz at fixed radius: `T_{+1/2}` rows
    /// `(f1 D_{-1}, f2 D_0, f3 D_{-1}, f4 D_0)` and `T_{-1/2}` rows
    /// `(g1 D_0, g2 D_{+1}, g3 D_0, g4 D_{+1})`.
    pub fn ansatz(j: HalfInt, m: HalfInt, f: [C64; 4], g: [C64; 4]) -> Self {
        let mut s = DoubletSection::zero(8);
        for k in 0..8 {
            let c = if k < 4 { f[k] } else { g[k - 4] };
            s.push(k, j, m, HalfInt::int(ANSATZ_SIGMA[k]), c);
        }
        s
    }

    /// Reads the ansatz coefficients back; errors if any term does not fit the
    /// `(j, m)` ansatz pattern.
    pub fn ansatz_coefficients(&self, j: HalfInt, m: HalfInt) -> Result<([C64; 4], [C64; 4])> {
        if self.dim != 8 {
            return Err(IsoError::Case("ansatz coefficients need an 8-component section".into()));
        }
        let mut f = [ZERO; 4];
        let mut g = [ZERO; 4];
        for t in &self.terms {
            if t.j != j || t.m != m || t.sigma != HalfInt::int(ANSATZ_SIGMA[t.component]) {
                if t.coeff.norm() == 0.0 {
                    continue;
                }
                return Err(IsoError::Case(format!(
                    "term in component {} with (j, m, sigma) = ({}, {}, {}) is outside the ({j}, {m}) ansatz",
                    t.component, t.j, t.m, t.sigma
                )));
            }
            if t.component < 4 {
                f[t.component] += t.coeff;
            } else {
                g[t.component - 4] += t.coeff;
            }
        }
        Ok((f, g))
    }

    /// Pointwise values of all components.
    pub fn eval(&self, theta: f64, phi: f64) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim];
        for t in &self.terms {
            out[t.component] += t.coeff * dsph(t.j, t.m, t.sigma, theta, phi);
        }
        out
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: C64) -> Self {
        let mut s = self.clone();
        for t in &mut s.terms {
            t.coeff *= c;
        }
        s
    }

    /// Sum of two sections with the same dimension.
    pub fn add(&self, other: &DoubletSection) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut s = self.clone();
        s.terms.extend(other.terms.iter().copied());
        s.simplify()
    }

    /// Difference of two sections.
    pub fn sub(&self, other: &DoubletSection) -> Self {
        self.add(&other.scale(-ONE))
    }

    /// Merges terms with identical labels.
    pub fn simplify(&self) -> Self {
        let mut out: Vec<SectionTerm> = Vec::new();
        for t in &self.terms {
            if let Some(e) = out
                .iter_mut()
                .find(|e| e.component == t.component && e.j == t.j && e.m == t.m && e.sigma == t.sigma)
            {
                e.coeff += t.coeff;
            } else {
                out.push(*t);
            }
        }
        DoubletSection { dim: self.dim, terms: out }
    }

    /// Largest coefficient modulus after merging terms.
    pub fn max_coeff(&self) -> f64 {
        self.simplify().terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }

    /// Largest pointwise modulus over the interior nodes of a sphere grid.
    pub fn max_abs_on(&self, grid: &SphereGrid) -> f64 {
        let mut m = 0.0f64;
        for &t in &grid.theta {
            for &p in &grid.phi {
                for v in self.eval(t, p) {
                    m = m.max(v.norm());
                }
            }
        }
        m
    }

    /// `<a, b> = sum_k int conj(a_k) b_k dOmega` by quadrature.
    pub fn inner(&self, other: &DoubletSection, grid: &SphereGrid) -> C64 {
        assert_eq!(self.dim, other.dim);
        grid.integrate(|t, p| {
            let a = self.eval(t, p);
            let b = other.eval(t, p);
            a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum()
        })
    }

    /// Applies a constant matrix acting on the component index.
    pub fn apply_matrix(&self, m: &DMatrix<C64>) -> Result<Self> {
        if m.ncols() != self.dim {
            return Err(IsoError::Domain(format!("matrix has {} columns, section has {} components", m.ncols(), self.dim)));
        }
        let mut out = DoubletSection::zero(m.nrows());
        for t in &self.terms {
            for r in 0..m.nrows() {
                let c = m[(r, t.component)];
                if c != ZERO {
                    out.terms.push(SectionTerm { component: r, coeff: c * t.coeff, ..*t });
                }
            }
        }
        Ok(out.simplify())
    }
}

/// Converts a fixed-size 8x8 matrix to a dynamic one.
pub fn dyn8(m: &Mat8) -> DMatrix<C64> {
    DMatrix::from_fn(8, 8, |r, c| m[(r, c)])
}

fn ladder_coeff(j: HalfInt, m: HalfInt, up: bool) -> f64 {
    let (j, m) = (j.value(), m.value());
    if up {
        ((j - m) * (j + m + 1.0)).max(0.0).sqrt()
    } else {
        ((j + m) * (j - m + 1.0)).max(0.0).sqrt()
    }
}

/// `J_+` or `J_-` on the expansion; each term must satisfy `sigma = -Lambda`
/// in its component, where `D^j_{-m,sigma}` maps to `-sqrt(...) D^j_{-(m +- 1),sigma}`.
fn ladder(spec: &MomentumSpec, s: &DoubletSection, up: bool) -> Result<DoubletSection> {
    let mut out = DoubletSection::zero(s.dim);
    for t in &s.terms {
        let lam = spec.lambda(t.component);
        if (t.sigma.value() + lam).abs() > 1e-12 {
            return Err(IsoError::Domain(format!(
                "term D^{}_{{-{}, {}}} in component {} is not in the basis of this operator (Lambda = {lam})",
                t.j, t.m, t.sigma, t.component
            )));
        }
        let step = if up { HalfInt::ONE } else { -HalfInt::ONE };
        let c = ladder_coeff(t.j, t.m, up);
        if c != 0.0 {
            out.push(t.component, t.j, t.m + step, t.sigma, -t.coeff * c);
        }
    }
    Ok(out)
}

/// Exact action of `J_1`, `J_2` or `J_3` on an expansion.
pub fn apply_j(spec: &MomentumSpec, axis: Axis, s: &DoubletSection) -> Result<DoubletSection> {
    spec.check_frame()?;
    if s.dim != spec.dim() {
        return Err(IsoError::Domain(format!("section has {} components, operator acts on {}", s.dim, spec.dim())));
    }
    match axis {
        Axis::Z => {
            // Validate the basis even though J_3 only needs the azimuthal phase.
            ladder(spec, s, true)?;
            let mut out = s.clone();
            for t in &mut out.terms {
                t.coeff *= t.m.value();
            }
            Ok(out)
        }
        Axis::X => Ok(ladder(spec, s, true)?.add(&ladder(spec, s, false)?).scale(re(0.5))),
        Axis::Y => Ok(ladder(spec, s, true)?.sub(&ladder(spec, s, false)?).scale(C64::new(0.0, -0.5))),
    }
}

/// Exact action of `J^2 = J_1^2 + J_2^2 + J_3^2`.
pub fn apply_j_squared(spec: &MomentumSpec, s: &DoubletSection) -> Result<DoubletSection> {
    let mut acc = DoubletSection::zero(s.dim);
    for axis in [Axis::X, Axis::Y, Axis::Z] {
        let once = apply_j(spec, axis, s)?;
        acc = acc.add(&apply_j(spec, axis, &once)?);
    }
    Ok(acc)
}

/// A section given pointwise, for finite-difference operators.
pub type PointSection<'a> = dyn Fn(f64, f64) -> Vec<C64> + 'a;

const POLE_GUARD: f64 = 1e-6;

fn fd_partials(f: &PointSection<'_>, theta: f64, phi: f64, h: f64) -> (Vec<C64>, Vec<C64>, Vec<C64>) {
    let stencil = |g: &dyn Fn(f64) -> Vec<C64>| -> Vec<C64> {
        let (a, b, c, d) = (g(-2.0 * h), g(-h), g(h), g(2.0 * h));
        (0..a.len()).map(|k| (a[k] - b[k] * 8.0 + c[k] * 8.0 - d[k]) / (12.0 * h)).collect()
    };
    let dt = stencil(&|x| f(theta + x, phi));
    let dp = stencil(&|x| f(theta, phi + x));
    (f(theta, phi), dt, dp)
}

/// `J_axis` applied as a differential operator by fourth-order central
/// differences with step `h`.
pub fn apply_j_fd(spec: &MomentumSpec, axis: Axis, f: &PointSection<'_>, theta: f64, phi: f64, h: f64) -> Result<Vec<C64>> {
    spec.check_frame()?;
    let st = theta.sin();
    if st.abs() < POLE_GUARD || (theta - 2.0 * h).sin() <= 0.0 || (theta + 2.0 * h).sin() <= 0.0 {
        return Err(IsoError::Pole(format!("momentum operator evaluated at theta = {theta}")));
    }
    let (v, dt, dp) = fd_partials(f, theta, phi, h);
    let cot = theta.cos() / st;
    let (sp, cp) = phi.sin_cos();
    Ok((0..v.len())
        .map(|k| {
            let lam = spec.lambda(k);
            match axis {
                Axis::X => I * (dt[k] * sp + dp[k] * (cot * cp)) + v[k] * (lam * cp / st),
                Axis::Y => I * (-dt[k] * cp + dp[k] * (cot * sp)) + v[k] * (lam * sp / st),
                Axis::Z => -I * dp[k],
            }
        })
        .collect())
}

/// Finite-difference residual of `[J_a, J_b] - i eps_{abc} J_c` on a pointwise
/// section at one point; returns the largest component modulus.
pub fn commutator_residual_fd(spec: &MomentumSpec, a: Axis, b: Axis, f: &PointSection<'_>, theta: f64, phi: f64) -> Result<f64> {
    let h = 1e-3;
    let (c, sign) = match (a, b) {
        (Axis::X, Axis::Y) => (Axis::Z, 1.0),
        (Axis::Y, Axis::Z) => (Axis::X, 1.0),
        (Axis::Z, Axis::X) => (Axis::Y, 1.0),
        (Axis::Y, Axis::X) => (Axis::Z, -1.0),
        (Axis::Z, Axis::Y) => (Axis::X, -1.0),
        (Axis::X, Axis::Z) => (Axis::Y, -1.0),
        _ => return Ok(0.0),
    };
    let jb = |t: f64, p: f64| apply_j_fd(spec, b, f, t, p, h).expect("interior point");
    let ja = |t: f64, p: f64| apply_j_fd(spec, a, f, t, p, h).expect("interior point");
    let ab = apply_j_fd(spec, a, &jb, theta, phi, h)?;
    let ba = apply_j_fd(spec, b, &ja, theta, phi, h)?;
    let jc = apply_j_fd(spec, c, f, theta, phi, h)?;
    Ok((0..ab.len()).map(|k| (ab[k] - ba[k] - I * sign * jc[k]).norm()).fold(0.0, f64::max))
}

/// `nu = sqrt(j (j + 1))`.
pub fn nu(j: HalfInt) -> f64 {
    let j = j.value();
    (j * (j + 1.0)).sqrt()
}

/// Exact action of `Sigma_{theta phi}` on an ansatz section: the `T_{+1/2}`
/// coefficients become `nu (-i f4, i f3, i f2, -i f1)` and likewise for `g`,
/// with the ansatz D-pattern preserved. For `j = 0` the result is zero.
pub fn apply_sigma(s: &DoubletSection, j: HalfInt, m: HalfInt) -> Result<DoubletSection> {
    let (f, g) = s.ansatz_coefficients(j, m)?;
    if j == HalfInt::ZERO {
        return Ok(DoubletSection::zero(8));
    }
    let n = nu(j);
    let map = |x: [C64; 4]| [-I * n * x[3], I * n * x[2], I * n * x[1], -I * n * x[0]];
    Ok(DoubletSection::ansatz(j, m, map(f), map(g)))
}

fn bispinor(m: Mat4) -> Mat8 {
    kron(&pauli(0), &m)
}

/// `X = i sigma^12 + t^3` on the doublet.
fn doublet_lambda_matrix() -> Mat8 {
    bispinor(i_sigma12()) + kron(&isospin(3), &Mat4::identity())
}

/// `Sigma_{theta phi} = i gamma^1 d_theta + gamma^2 (i d_phi + X cos(theta)) / sin(theta)`
/// applied by finite differences.
pub fn apply_sigma_fd(f: &PointSection<'_>, theta: f64, phi: f64, h: f64) -> Result<Vec<C64>> {
    let st = theta.sin();
    if st.abs() < POLE_GUARD {
        return Err(IsoError::Pole(format!("Sigma evaluated at theta = {theta}")));
    }
    let (v, dt, dp) = fd_partials(f, theta, phi, h);
    let to = |x: &Vec<C64>| crate::algebra::Vec8::from_iterator(x.iter().copied());
    let (v, dt, dp) = (to(&v), to(&dt), to(&dp));
    let g1 = bispinor(gamma(1));
    let g2 = bispinor(gamma(2));
    let x = doublet_lambda_matrix();
    let out = g1 * dt * I + g2 * (dp * I + x * v * re(theta.cos())) * re(1.0 / st);
    Ok(out.iter().copied().collect())
}

/// The isotopic mixing matrix `2 (gamma^1 t^2 - gamma^2 t^1)`.
pub fn mixing_matrix() -> Mat8 {
    (kron(&isospin(2), &gamma(1)) - kron(&isospin(1), &gamma(2))) * re(2.0)
}

/// The mixing term `(2 W / r)(gamma^1 t^2 - gamma^2 t^1)` acting on a section,
/// with `w_over_r = W / r` and `2 W = e r^2 K + 1`.
///
/// On an ansatz section the `T_{+1/2}` block receives `2 (W/r) (0, i g3, 0, -i g1)`
/// and the `T_{-1/2}` block `2 (W/r) (-i f4, 0, i f2, 0)`, all with `D_0`.
pub fn apply_mixing(s: &DoubletSection, w_over_r: f64) -> Result<DoubletSection> {
    s.apply_matrix(&dyn8(&(mixing_matrix() * re(w_over_r))))
}

/// The bispinor factor of `K`: `-i gamma^0 gamma^3`.
pub fn k_prefactor() -> Mat8 {
    bispinor(gamma(0) * gamma(3) * (-I))
}

/// `K = -i gamma^0 gamma^3 Sigma_{theta phi}` on an ansatz section.
pub fn apply_k(s: &DoubletSection, j: HalfInt, m: HalfInt) -> Result<DoubletSection> {
    apply_sigma(s, j, m)?.apply_matrix(&dyn8(&k_prefactor()))
}

/// Eigenvalue of `K` on the `mu` branch: `-mu sqrt(j (j + 1))`.
pub fn k_eigenvalue(j: HalfInt, mu: i8) -> f64 {
    -(mu as f64) * nu(j)
}

/// Deviation of ansatz coefficients from the `K` eigen-linkage
/// `f4 = mu f1, f3 = mu f2, g4 = mu g1, g3 = mu g2`, minimized over `mu`.
/// Returns `(mu, residual)`.
pub fn k_linkage_residual(f: &[C64; 4], g: &[C64; 4]) -> (i8, f64) {
    let res = |mu: f64| {
        [(f[3] - f[0] * mu), (f[2] - f[1] * mu), (g[3] - g[0] * mu), (g[2] - g[1] * mu)]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    };
    let (p, n) = (res(1.0), res(-1.0));
    if p <= n {
        (1, p)
    } else {
        (-1, n)
    }
}

/// Local coefficients of the Dirac operator at one radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalCoefficients {
    pub r: f64,
    pub epsilon: f64,
    pub mass: f64,
    pub w: f64,
    pub f_tilde: f64,
    pub phi_tilde: f64,
}

impl LocalCoefficients {
    /// Samples the profile functions at `r`.
    pub fn from_profiles(p: &ProfileFunctions, r: f64, epsilon: f64, mass: f64) -> Self {
        LocalCoefficients { r, epsilon, mass, w: p.w(r), f_tilde: p.f_tilde(r), phi_tilde: p.phi_tilde(r) }
    }
}

/// The full operator matrices `(M0, M1)` such that the Dirac operator on
/// `u = r Psi` at fixed angles reads `M0 u + M1 du/dr + Sigma u / r`.
fn dirac_matrices(c: &LocalCoefficients) -> (Mat8, Mat8) {
    let iso = |a: f64, b: f64| pauli(0) * re(a) + pauli(3) * re(b);
    let m0 = kron(&iso(c.epsilon, c.f_tilde), &gamma(0)) + mixing_matrix() * re(c.w / c.r)
        - kron(&iso(c.mass, c.phi_tilde), &Mat4::identity());
    let m1 = bispinor(gamma(3) * I);
    (m0, m1)
}

/// The Dirac operator applied to an ansatz section at one radius: `y` holds
/// the coefficients `(f1..f4, g1..g4)` of `u = r Psi` and `dy` their radial
/// derivatives. The result again has the ansatz pattern.
pub fn dirac_section(j: HalfInt, m: HalfInt, y: &[C64; 8], dy: &[C64; 8], c: &LocalCoefficients) -> Result<DoubletSection> {
    let split = |v: &[C64; 8]| ([v[0], v[1], v[2], v[3]], [v[4], v[5], v[6], v[7]]);
    let (f, g) = split(y);
    let (df, dg) = split(dy);
    let s = DoubletSection::ansatz(j, m, f, g);
    let ds = DoubletSection::ansatz(j, m, df, dg);
    let (m0, m1) = dirac_matrices(c);
    let out = s
        .apply_matrix(&dyn8(&m0))?
        .add(&ds.apply_matrix(&dyn8(&m1))?)
        .add(&apply_sigma(&s, j, m)?.scale(re(1.0 / c.r)));
    Ok(out)
}

/// The Dirac operator on a pointwise `u(r, theta, phi) = r Psi` applied
/// entirely by finite differences, including `Sigma` in its differential form.
pub fn dirac_operator_fd(
    u: &dyn Fn(f64, f64, f64) -> Vec<C64>,
    c: &LocalCoefficients,
    theta: f64,
    phi: f64,
    h: f64,
) -> Result<Vec<C64>> {
    let to = |x: Vec<C64>| crate::algebra::Vec8::from_iterator(x);
    let r = c.r;
    let du: Vec<C64> = {
        let (a, b, cc, d) = (u(r - 2.0 * h, theta, phi), u(r - h, theta, phi), u(r + h, theta, phi), u(r + 2.0 * h, theta, phi));
        (0..8).map(|k| (a[k] - b[k] * 8.0 + cc[k] * 8.0 - d[k]) / (12.0 * h)).collect()
    };
    let ang = |t: f64, p: f64| u(r, t, p);
    let sig = apply_sigma_fd(&ang, theta, phi, h)?;
    let (m0, m1) = dirac_matrices(c);
    let out = m0 * to(u(r, theta, phi)) + m1 * to(du) + to(sig) * re(1.0 / r);
    Ok(out.iter().copied().collect())
}

/// Pointwise residual of the full Dirac operator for radial samples on a
/// uniform grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiracResidual {
    pub grid: Vec<f64>,
    /// Largest residual modulus over the angular sample at each radius.
    pub pointwise_max: Vec<f64>,
    /// Largest value over all radii.
    pub max: f64,
}

/// Applies the Dirac operator to radial samples `values[i] = (f1..f4, g1..g4)`
/// of `u = r Psi` on a uniform `grid`, differentiating radially with
/// fourth-order differences, and evaluates the residual at `angles`.
#[allow(clippy::too_many_arguments)]
pub fn dirac_residual_on_grid(
    j: HalfInt,
    m: HalfInt,
    grid: &[f64],
    values: &[[C64; 8]],
    profiles: &ProfileFunctions,
    epsilon: f64,
    mass: f64,
    angles: &[(f64, f64)],
) -> Result<DiracResidual> {
    if grid.len() != values.len() {
        return Err(IsoError::Domain("grid and samples differ in length".into()));
    }
    let h = if grid.len() > 1 { grid[1] - grid[0] } else { 0.0 };
    let mut dys = vec![[ZERO; 8]; grid.len()];
    for k in 0..8 {
        let col: Vec<C64> = values.iter().map(|v| v[k]).collect();
        let d = derivative4(h, &col)?;
        for (i, di) in d.into_iter().enumerate() {
            dys[i][k] = di;
        }
    }
    let mut pointwise = Vec::with_capacity(grid.len());
    for (i, &r) in grid.iter().enumerate() {
        let c = LocalCoefficients::from_profiles(profiles, r, epsilon, mass);
        let sec = dirac_section(j, m, &values[i], &dys[i], &c)?;
        let mut mx = 0.0f64;
        for &(t, p) in angles {
            for v in sec.eval(t, p) {
                mx = mx.max(v.norm());
            }
        }
        pointwise.push(mx);
    }
    let max = pointwise.iter().copied().fold(0.0, f64::max);
    Ok(DiracResidual { grid: grid.to_vec(), pointwise_max: pointwise, max })
}

/// A small reflection-free set of interior sample angles.
pub fn interior_angles() -> Vec<(f64, f64)> {
    let mut v = Vec::new();
    for a in 1..=4 {
        for b in 0..3 {
            v.push((a as f64 * 0.6, 0.4 + b as f64 * 1.9));
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn h(x: f64) -> HalfInt {
        HalfInt::from_f64(x).unwrap()
    }

    fn rc(rng: &mut ChaCha8Rng) -> C64 {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    fn random_ansatz(rng: &mut ChaCha8Rng, j: HalfInt, m: HalfInt) -> DoubletSection {
        let f = [rc(rng), rc(rng), rc(rng), rc(rng)];
        let g = [rc(rng), rc(rng), rc(rng), rc(rng)];
        DoubletSection::ansatz(j, m, f, g)
    }

    /// A random section mixing several `(j, m)` in the basis of `spec`.
    fn random_section(rng: &mut ChaCha8Rng, spec: &MomentumSpec) -> DoubletSection {
        let mut s = DoubletSection::zero(spec.dim());
        for k in 0..spec.dim() {
            let sigma = h(-spec.lambda(k));
            for jt in 0..4 {
                let j = HalfInt::from_twice(sigma.abs().twice_value + 2 * jt);
                for m in j.projections() {
                    s.push(k, j, m, sigma, rc(rng) * 0.3);
                }
            }
        }
        s
    }

    fn max_diff(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn j3_eigenvalue_is_m() {
        let spec = MomentumSpec::scalar(0.5);
        let mut s = DoubletSection::zero(1);
        s.push(0, h(1.5), h(0.5), h(-0.5), ONE);
        let out = apply_j(&spec, Axis::Z, &s).unwrap();
        assert!((out.terms[0].coeff - re(0.5)).norm() < 1e-15);
    }

    #[test]
    fn exact_action_matches_differential_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for spec in [MomentumSpec::scalar(-1.0), MomentumSpec::spinor_monopole(0.5), MomentumSpec::doublet()] {
            let s = random_section(&mut rng, &spec);
            for axis in [Axis::X, Axis::Y, Axis::Z] {
                let exact = apply_j(&spec, axis, &s).unwrap();
                let f = |t: f64, p: f64| s.eval(t, p);
                for &(t, p) in &[(0.7, 0.3), (1.9, 4.0), (2.6, 1.1)] {
                    let fd = apply_j_fd(&spec, axis, &f, t, p, 1e-3).unwrap();
                    assert!(max_diff(&fd, &exact.eval(t, p)) < 1e-9, "{axis:?} {spec:?}");
                }
            }
        }
    }

    #[test]
    fn j_squared_on_ansatz() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = MomentumSpec::doublet();
        for (j, m) in [(1.0, 0.0), (1.0, -1.0), (2.0, 1.0), (0.0, 0.0)] {
            let (j, m) = (h(j), h(m));
            let s = random_ansatz(&mut rng, j, m);
            let js = apply_j_squared(&spec, &s).unwrap();
            let expect = s.scale(re(j.value() * (j.value() + 1.0)));
            assert!(js.sub(&expect).max_coeff() < 1e-12);
            // Finite-difference oracle for J^2 through nested application.
            let f = |t: f64, p: f64| s.eval(t, p);
            let mut acc = vec![ZERO; 8];
            for axis in [Axis::X, Axis::Y, Axis::Z] {
                let inner = |t: f64, p: f64| apply_j_fd(&spec, axis, &f, t, p, 1e-3).unwrap();
                let outer = apply_j_fd(&spec, axis, &inner, 1.1, 0.8, 1e-3).unwrap();
                for k in 0..8 {
                    acc[k] += outer[k];
                }
            }
            let direct = expect.eval(1.1, 0.8);
            assert!(max_diff(&acc, &direct) < 1e-7);
        }
    }

    #[test]
    fn commutators_close_for_all_variants() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for spec in [MomentumSpec::scalar(0.5), MomentumSpec::spinor_monopole(-1.0), MomentumSpec::doublet()] {
            let s = random_section(&mut rng, &spec);
            let f = |t: f64, p: f64| s.eval(t, p);
            for (a, b) in [(Axis::X, Axis::Y), (Axis::Y, Axis::Z), (Axis::Z, Axis::X)] {
                let r = commutator_residual_fd(&spec, a, b, &f, 1.2, 2.2).unwrap();
                assert!(r < 1e-8, "{spec:?} {a:?}{b:?}: {r}");
            }
        }
    }

    #[test]
    fn pole_is_reported() {
        let s = DoubletSection::ansatz(h(1.0), h(0.0), [ONE; 4], [ONE; 4]);
        let f = |t: f64, p: f64| s.eval(t, p);
        assert!(matches!(apply_j_fd(&MomentumSpec::doublet(), Axis::X, &f, 0.0, 0.0, 1e-3), Err(IsoError::Pole(_))));
    }

    #[test]
    fn sigma_pattern_example() {
        let s = DoubletSection::ansatz(h(1.0), h(0.0), [ONE, ZERO, ZERO, ZERO], [ZERO; 4]);
        let out = apply_sigma(&s, h(1.0), h(0.0)).unwrap();
        let (f, g) = out.ansatz_coefficients(h(1.0), h(0.0)).unwrap();
        assert!((f[3] - (-I * 2f64.sqrt())).norm() < 1e-15);
        assert!(f[..3].iter().chain(g.iter()).all(|z| z.norm() == 0.0));
        let zero = apply_sigma(&DoubletSection::ansatz(h(0.0), h(0.0), [ONE; 4], [ONE; 4]), h(0.0), h(0.0)).unwrap();
        assert!(zero.terms.is_empty());
    }

    #[test]
    fn sigma_matches_differential_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (j, m) in [(1.0, 1.0), (2.0, -1.0), (3.0, 2.0), (0.0, 0.0)] {
            let (j, m) = (h(j), h(m));
            let s = random_ansatz(&mut rng, j, m);
            let exact = apply_sigma(&s, j, m).unwrap();
            let f = |t: f64, p: f64| s.eval(t, p);
            for &(t, p) in &[(0.5, 0.1), (1.7, 3.3), (2.9, 5.0)] {
                let fd = apply_sigma_fd(&f, t, p, 1e-3).unwrap();
                assert!(max_diff(&fd, &exact.eval(t, p)) < 1e-8);
            }
        }
    }

    #[test]
    fn mixing_pattern() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (j, m) = (h(2.0), h(1.0));
        let f = [rc(&mut rng), rc(&mut rng), rc(&mut rng), rc(&mut rng)];
        let g = [rc(&mut rng), rc(&mut rng), rc(&mut rng), rc(&mut rng)];
        let w = 0.37;
        let out = apply_mixing(&DoubletSection::ansatz(j, m, f, g), w / 2.0).unwrap();
        let (of, og) = out.ansatz_coefficients(j, m).unwrap();
        let ef = [ZERO, I * g[2] * w, ZERO, -I * g[0] * w];
        let eg = [-I * f[3] * w, ZERO, I * f[1] * w, ZERO];
        assert!(max_diff(&of, &ef) < 1e-15 && max_diff(&og, &eg) < 1e-15, "{of:?} {ef:?} {og:?} {eg:?}");
        // The simplest monopole has W = 0.
        let p = ProfileFunctions::simplest_monopole(1.3);
        assert!(p.w(2.0).abs() < 1e-15);
        assert!(apply_mixing(&DoubletSection::ansatz(j, m, f, g), p.w(2.0) / 2.0).unwrap().max_coeff() < 1e-15);
        // One-sided input only feeds the opposite block.
        let only_f = apply_mixing(&DoubletSection::ansatz(j, m, f, [ZERO; 4]), w / 2.0).unwrap();
        let (of, _) = only_f.ansatz_coefficients(j, m).unwrap();
        assert!(of.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn k_eigenstates() {
        for (j, mu) in [(1.0, 1i8), (2.0, -1i8), (3.0, 1i8)] {
            let (j, m) = (h(j), h(0.0));
            let (a, b, c, d) = (C64::new(0.3, 0.1), C64::new(-0.7, 0.2), C64::new(0.5, -0.4), C64::new(0.2, 0.9));
            let muc = re(mu as f64);
            let f = [a, b, b * muc, a * muc];
            let g = [c, d, d * muc, c * muc];
            let s = DoubletSection::ansatz(j, m, f, g);
            let ks = apply_k(&s, j, m).unwrap();
            let lam = k_eigenvalue(j, mu);
            assert!(ks.sub(&s.scale(re(lam))).max_coeff() < 1e-14);
            let (best, res) = k_linkage_residual(&f, &g);
            assert_eq!(best, mu);
            assert!(res < 1e-15);
            let grid = SphereGrid::new(16, 16).unwrap();
            assert!(s.inner(&ks, &grid).im.abs() < 1e-12);
        }
        assert!((k_eigenvalue(h(1.0), 1) + 2f64.sqrt()).abs() < 1e-15);
        assert!((k_eigenvalue(h(2.0), -1) - 6f64.sqrt()).abs() < 1e-15);
        let (_, res) = k_linkage_residual(&[ONE, ZERO, ZERO, ZERO], &[ZERO; 4]);
        assert!(res > 0.5);
    }

    #[test]
    fn radial_equations_match_full_operator() {
        // Polynomial radial profiles with exact derivatives, pushed through the
        // fully differential operator, reproduce the coefficient form.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = ProfileFunctions::constant(0.4, 0.3, 0.2, 1.1, 0.7);
        for (j, m) in [(1.0, 0.0), (2.0, 1.0), (0.0, 0.0)] {
            let (j, m) = (h(j), h(m));
            let a: Vec<C64> = (0..8).map(|_| rc(&mut rng)).collect();
            let b: Vec<C64> = (0..8).map(|_| rc(&mut rng)).collect();
            let yk = |r: f64| -> [C64; 8] { std::array::from_fn(|k| a[k] + b[k] * r * r) };
            let u = |r: f64, t: f64, ph: f64| {
                let y = yk(r);
                DoubletSection::ansatz(j, m, [y[0], y[1], y[2], y[3]], [y[4], y[5], y[6], y[7]]).eval(t, ph)
            };
            let r = 1.3;
            let c = LocalCoefficients::from_profiles(&p, r, 0.9, 0.6);
            let dy: [C64; 8] = std::array::from_fn(|k| b[k] * 2.0 * r);
            let sec = dirac_section(j, m, &yk(r), &dy, &c).unwrap();
            assert!(sec.ansatz_coefficients(j, m).is_ok());
            for &(t, ph) in &[(0.8, 0.4), (2.0, 3.0)] {
                let fd = dirac_operator_fd(&u, &c, t, ph, 1e-3).unwrap();
                assert!(max_diff(&fd, &sec.eval(t, ph)) < 1e-8);
            }
            // J^2 and J_3 are preserved by the operator.
            let spec = MomentumSpec::doublet();
            let js = apply_j_squared(&spec, &sec).unwrap();
            assert!(js.sub(&sec.scale(re(j.value() * (j.value() + 1.0)))).max_coeff() < 1e-12);
        }
    }
}
