//! Isotopic gauge frames: Gibbs-vector rotations, gauge transformations of the
//! monopole potentials, and the spinor/vector gauge-matrix pair of the
//! spherical tetrad.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, Matrix4, Vector3};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::{pauli, sigma_dot, Mat2, I};
use crate::error::{IsoError, Result};

/// A Gibbs 3-vector `c = tan(angle / 2) * axis` parameterizing a rotation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsVector {
    /// Components.
    pub c: [f64; 3],
}

impl GibbsVector {
    /// Wraps three components.
    pub fn new(c: [f64; 3]) -> Self {
        GibbsVector { c }
    }

    fn vec(&self) -> Vector3<f64> {
        Vector3::from(self.c)
    }

    /// Gibbs vector of the inverse rotation.
    pub fn inverse(&self) -> Self {
        GibbsVector { c: [-self.c[0], -self.c[1], -self.c[2]] }
    }

    /// Gibbs vector of the product rotation `O(a) O(b)`:
    /// `(a + b + a x b) / (1 - a . b)`.
    pub fn compose(a: &GibbsVector, b: &GibbsVector) -> Result<Self> {
        let (va, vb) = (a.vec(), b.vec());
        let den = 1.0 - va.dot(&vb);
        if den.abs() < 1e-14 {
            return Err(IsoError::Domain("composite rotation by pi has no finite Gibbs vector".into()));
        }
        let c = (va + vb + va.cross(&vb)) / den;
        Ok(GibbsVector { c: [c[0], c[1], c[2]] })
    }
}

/// The matrix `c^x` with `(c^x)_{ac} = -eps_{acb} c_b`, so that `c^x v = c x v`.
pub fn cross_matrix(c: &[f64; 3]) -> Matrix3<f64> {
    Matrix3::new(0.0, -c[2], c[1], c[2], 0.0, -c[0], -c[1], c[0], 0.0)
}

/// `O(c) = I + 2 (c^x + (c^x)^2) / (1 + c^2)`.
pub fn rotation_from_gibbs(c: &GibbsVector) -> Matrix3<f64> {
    let k = cross_matrix(&c.c);
    let c2 = c.vec().norm_squared();
    Matrix3::identity() + (k + k * k) * (2.0 / (1.0 + c2))
}

/// The inhomogeneous factor `f(c) = -2 (1 + c^x) / (1 + c^2)` of the transformation law.
pub fn inhomogeneous_factor(c: &GibbsVector) -> Matrix3<f64> {
    let c2 = c.vec().norm_squared();
    (Matrix3::identity() + cross_matrix(&c.c)) * (-2.0 / (1.0 + c2))
}

/// Gibbs vector of the simplest rotation taking `a` to `b`:
/// `c = (a x b) / ((a + b) . a)`.
pub fn gibbs_between(a: [f64; 3], b: [f64; 3]) -> Result<GibbsVector> {
    let (va, vb) = (Vector3::from(a), Vector3::from(b));
    let (na, nb) = (va.norm(), vb.norm());
    if na == 0.0 || (na - nb).abs() > 1e-12 * na.max(nb) {
        return Err(IsoError::Domain("gibbs_between needs two nonzero vectors of equal length".into()));
    }
    let den = (va + vb).dot(&va);
    if den.abs() < 1e-12 * na * na {
        return Err(IsoError::Domain("antiparallel vectors: rotation by pi is degenerate".into()));
    }
    let c = va.cross(&vb) / den;
    Ok(GibbsVector { c: [c[0], c[1], c[2]] })
}

/// Radial unit vector `n(theta, phi)`.
pub fn unit_radial(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Isotopic gauge label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    /// Hedgehog (Cartesian) isotopic frame.
    Cartesian,
    /// Dirac gauge: scalar along the third axis, string along the negative z half-axis.
    Dirac,
    /// Schwinger gauge: scalar along the third axis, symmetric string.
    Schwinger,
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Gauge::Cartesian => "cartesian",
            Gauge::Dirac => "dirac",
            Gauge::Schwinger => "schwinger",
        };
        f.write_str(s)
    }
}

/// Local Lorentz frame in which bispinor components are written.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tetrad {
    /// Spherical tetrad aligned with `(r, theta, phi)`.
    Spherical,
    /// Cartesian tetrad aligned with `(x, y, z)`.
    Cartesian,
}

impl fmt::Display for Tetrad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tetrad::Spherical => "spherical",
            Tetrad::Cartesian => "cartesian",
        })
    }
}

/// A scalar profile function of the radius.
pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Profile functions of the monopole ansatz
/// `Phi^a = x^a Phi(r)`, `W^a_0 = x^a F(r)`, `W^a_i = eps_{iab} x^b K(r)`.
#[derive(Clone)]
pub struct ProfileFunctions {
    /// Short description used in exported metadata.
    pub label: String,
    /// `Phi(r)`.
    pub phi_of_r: RadialFn,
    /// `F(r)`.
    pub f_of_r: RadialFn,
    /// `K(r)`.
    pub k_of_r: RadialFn,
    /// Gauge coupling `e`.
    pub e: f64,
    /// Scalar coupling `kappa`.
    pub kappa: f64,
    /// Magnetic charge `g`.
    pub g: f64,
}

impl fmt::Debug for ProfileFunctions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProfileFunctions")
            .field("label", &self.label)
            .field("e", &self.e)
            .field("kappa", &self.kappa)
            .field("g", &self.g)
            .finish()
    }
}

impl ProfileFunctions {
    /// Builds profiles from closures.
    pub fn new(
        label: &str,
        phi_of_r: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_of_r: impl Fn(f64) -> f64 + Send + Sync + 'static,
        k_of_r: impl Fn(f64) -> f64 + Send + Sync + 'static,
        e: f64,
        kappa: f64,
    ) -> Self {
        ProfileFunctions {
            label: label.to_string(),
            phi_of_r: Arc::new(phi_of_r),
            f_of_r: Arc::new(f_of_r),
            k_of_r: Arc::new(k_of_r),
            e,
            kappa,
            g: 1.0 / e,
        }
    }

    /// The embedded Abelian monopole: `K = -1/(e r^2)`, `F = Phi = 0`.
    pub fn simplest_monopole(e: f64) -> Self {
        ProfileFunctions::new("simplest_monopole", |_| 0.0, |_| 0.0, move |r| -1.0 / (e * r * r), e, 0.0)
    }

    /// The free doublet: all profiles vanish.
    pub fn free(e: f64) -> Self {
        ProfileFunctions::new("free", |_| 0.0, |_| 0.0, |_| 0.0, e, 0.0)
    }

    /// Constant profiles, useful for probing the compatibility conditions.
    pub fn constant(phi: f64, f: f64, k: f64, e: f64, kappa: f64) -> Self {
        ProfileFunctions::new(
            &format!("constant(phi={phi},f={f},k={k},kappa={kappa})"),
            move |_| phi,
            move |_| f,
            move |_| k,
            e,
            kappa,
        )
    }

    /// Mixing coefficient `W(r) = (e r^2 K + 1)/2`.
    pub fn w(&self, r: f64) -> f64 {
        0.5 * (self.e * r * r * (self.k_of_r)(r) + 1.0)
    }

    /// `F~(r) = e r F / 2`.
    pub fn f_tilde(&self, r: f64) -> f64 {
        0.5 * self.e * r * (self.f_of_r)(r)
    }

    /// `Phi~(r) = kappa r Phi / 2`.
    pub fn phi_tilde(&self, r: f64) -> f64 {
        0.5 * self.kappa * r * (self.phi_of_r)(r)
    }
}

/// A Gibbs-vector field `c(r, theta, phi)` defining a gauge transformation.
#[derive(Clone)]
pub enum GibbsField {
    /// `c = tan(theta/2) (sin phi, -cos phi, 0)`: Cartesian to Dirac.
    CartesianToDirac,
    /// `c' = (0, 0, -tan(phi/2))`: Dirac to Schwinger.
    DiracToSchwinger,
    /// `c'' = (tan(theta/2) tan(phi/2), -tan(theta/2), -tan(phi/2))`: Cartesian to Schwinger.
    CartesianToSchwinger,
    /// The inverse transformation `c -> -c` of another field.
    Inverse(Box<GibbsField>),
    /// A generic field; derivatives by fourth-order centered differences.
    Custom(Arc<dyn Fn(f64, f64, f64) -> [f64; 3] + Send + Sync>),
}

impl fmt::Debug for GibbsField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GibbsField::CartesianToDirac => f.write_str("CartesianToDirac"),
            GibbsField::DiracToSchwinger => f.write_str("DiracToSchwinger"),
            GibbsField::CartesianToSchwinger => f.write_str("CartesianToSchwinger"),
            GibbsField::Inverse(inner) => write!(f, "Inverse({inner:?})"),
            GibbsField::Custom(_) => f.write_str("Custom"),
        }
    }
}

fn half_tan(x: f64, what: &str) -> Result<(f64, f64)> {
    let c = (0.5 * x).cos();
    if c.abs() < 1e-12 {
        return Err(IsoError::Pole(format!("tan({what}/2) is singular at {what} = {x}")));
    }
    let t = (0.5 * x).tan();
    Ok((t, 0.5 / (c * c)))
}

const FD_STEP: f64 = 1e-5;

impl GibbsField {
    /// Field value at `(r, theta, phi)`.
    pub fn value(&self, r: f64, theta: f64, phi: f64) -> Result<GibbsVector> {
        Ok(GibbsVector::new(match self {
            GibbsField::CartesianToDirac => {
                let (t, _) = half_tan(theta, "theta")?;
                [t * phi.sin(), -t * phi.cos(), 0.0]
            }
            GibbsField::DiracToSchwinger => {
                let (u, _) = half_tan(phi, "phi")?;
                [0.0, 0.0, -u]
            }
            GibbsField::CartesianToSchwinger => composite_gibbs(theta, phi)?.c,
            GibbsField::Inverse(inner) => inner.value(r, theta, phi)?.inverse().c,
            GibbsField::Custom(f) => f(r, theta, phi),
        }))
    }

    /// Partial derivatives `d c / d x^alpha` for `alpha = t, r, theta, phi`.
    pub fn derivatives(&self, r: f64, theta: f64, phi: f64) -> Result<[[f64; 3]; 4]> {
        let zero = [0.0; 3];
        Ok(match self {
            GibbsField::CartesianToDirac => {
                let (t, dt) = half_tan(theta, "theta")?;
                let (s, c) = phi.sin_cos();
                [zero, zero, [dt * s, -dt * c, 0.0], [t * c, t * s, 0.0]]
            }
            GibbsField::DiracToSchwinger => {
                let (_, du) = half_tan(phi, "phi")?;
                [zero, zero, zero, [0.0, 0.0, -du]]
            }
            GibbsField::CartesianToSchwinger => {
                let (t, dt) = half_tan(theta, "theta")?;
                let (u, du) = half_tan(phi, "phi")?;
                [zero, zero, [dt * u, -dt, 0.0], [t * du, 0.0, -du]]
            }
            GibbsField::Inverse(inner) => {
                let d = inner.derivatives(r, theta, phi)?;
                d.map(|v| v.map(|x| -x))
            }
            GibbsField::Custom(f) => {
                let h = FD_STEP;
                let stencil = |g: &dyn Fn(f64) -> [f64; 3]| {
                    let (a, b, c, d) = (g(-2.0 * h), g(-h), g(h), g(2.0 * h));
                    [0, 1, 2].map(|k| (a[k] - 8.0 * b[k] + 8.0 * c[k] - d[k]) / (12.0 * h))
                };
                [
                    zero,
                    stencil(&|d| f(r + d, theta, phi)),
                    stencil(&|d| f(r, theta + d, phi)),
                    stencil(&|d| f(r, theta, phi + d)),
                ]
            }
        })
    }
}

/// `c''(theta, phi) = (tan(theta/2) tan(phi/2), -tan(theta/2), -tan(phi/2))`.
pub fn composite_gibbs(theta: f64, phi: f64) -> Result<GibbsVector> {
    let (t, _) = half_tan(theta, "theta")?;
    let (u, _) = half_tan(phi, "phi")?;
    Ok(GibbsVector::new([t * u, -t, -u]))
}

/// The closed-form matrix `O(c'')` linking the Cartesian and Schwinger frames.
pub fn composite_rotation_closed_form(theta: f64, phi: f64) -> Matrix3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Matrix3::new(ct * cp, ct * sp, -st, -sp, cp, 0.0, st * cp, st * sp, ct)
}

/// Components of the monopole fields at one point, in coordinate basis
/// `(t, r, theta, phi)`, each an isotopic 3-vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialValue {
    /// Scalar triplet `Phi^a`.
    pub scalar: [f64; 3],
    /// `W^a_alpha` indexed `[alpha][a]`.
    pub w: [[f64; 3]; 4],
}

/// The monopole potentials in a named isotopic gauge, as a lazily evaluated field.
#[derive(Clone, Debug)]
pub struct PotentialSet {
    /// Gauge tag.
    pub gauge: Gauge,
    /// Profile functions of the underlying ansatz.
    pub profiles: ProfileFunctions,
    /// Gauge transformations applied to the Cartesian ansatz, in order.
    pub chain: Vec<GibbsField>,
}

impl PotentialSet {
    /// The Cartesian ansatz written in spherical coordinates.
    pub fn cartesian(profiles: ProfileFunctions) -> Self {
        PotentialSet { gauge: Gauge::Cartesian, profiles, chain: Vec::new() }
    }

    /// The ansatz in the Dirac gauge.
    pub fn dirac(profiles: ProfileFunctions) -> Self {
        transform_potential(&PotentialSet::cartesian(profiles), GibbsField::CartesianToDirac, Gauge::Dirac)
    }

    /// The ansatz in the Schwinger gauge, reached through the Dirac gauge.
    pub fn schwinger(profiles: ProfileFunctions) -> Self {
        transform_potential(&PotentialSet::dirac(profiles), GibbsField::DiracToSchwinger, Gauge::Schwinger)
    }

    /// Evaluates all components at `(r, theta, phi)`.
    pub fn eval(&self, r: f64, theta: f64, phi: f64) -> Result<PotentialValue> {
        let mut v = cartesian_ansatz(&self.profiles, r, theta, phi);
        for field in &self.chain {
            let c = field.value(r, theta, phi)?;
            let dc = field.derivatives(r, theta, phi)?;
            let o = rotation_from_gibbs(&c);
            let f = inhomogeneous_factor(&c);
            let y = o * Vector3::from(v.scalar);
            v.scalar = [y[0], y[1], y[2]];
            for alpha in 0..4 {
                let hom = o * Vector3::from(v.w[alpha]);
                let inh = f * Vector3::from(dc[alpha]) / self.profiles.e;
                let s = hom + inh;
                v.w[alpha] = [s[0], s[1], s[2]];
            }
        }
        Ok(v)
    }
}

/// `W'_alpha = O(c) W_alpha + (1/e) f(c) d_alpha c`, `Phi' = O(c) Phi`.
pub fn transform_potential(p: &PotentialSet, field: GibbsField, target: Gauge) -> PotentialSet {
    let mut chain = p.chain.clone();
    chain.push(field);
    PotentialSet { gauge: target, profiles: p.profiles.clone(), chain }
}

/// The hedgehog ansatz pulled back to spherical coordinates:
/// `W^a_beta = (d x^i / d x^beta) eps_{iab} x^b K(r)`.
fn cartesian_ansatz(p: &ProfileFunctions, r: f64, theta: f64, phi: f64) -> PotentialValue {
    let n = unit_radial(theta, phi);
    let x = n.map(|v| r * v);
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let jac: [[f64; 3]; 3] = [
        n,
        [r * ct * cp, r * ct * sp, -r * st],
        [-r * st * sp, r * st * cp, 0.0],
    ];
    let k = (p.k_of_r)(r);
    let eps = |i: usize, a: usize, b: usize| -> f64 {
        match (i, a, b) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
            (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
            _ => 0.0,
        }
    };
    let mut w = [[0.0; 3]; 4];
    let pf = (p.f_of_r)(r);
    w[0] = x.map(|xa| xa * pf);
    for beta in 0..3 {
        for a in 0..3 {
            let mut s = 0.0;
            for i in 0..3 {
                for b in 0..3 {
                    s += jac[beta][i] * eps(i, a, b) * x[b];
                }
            }
            w[beta + 1][a] = s * k;
        }
    }
    let pphi = (p.phi_of_r)(r);
    PotentialValue { scalar: x.map(|xa| xa * pphi), w }
}

/// Spinor gauge matrix of the spherical tetrad,
/// `B = sign [[cos(t/2) e^{i p/2}, sin(t/2) e^{-i p/2}], [-sin(t/2) e^{i p/2}, cos(t/2) e^{-i p/2}]]`.
pub fn spinor_gauge_matrix(theta: f64, phi: f64, sign: f64) -> Mat2 {
    let (s, c) = (0.5 * theta).sin_cos();
    let ep = C64::from_polar(1.0, 0.5 * phi);
    let em = ep.conj();
    Mat2::new(ep * c, em * s, -ep * s, em * c) * C64::new(sign, 0.0)
}

/// `(I - i sigma . c) / sqrt(1 + c^2)`.
pub fn spinor_from_gibbs(c: &GibbsVector) -> Mat2 {
    let c2: f64 = c.c.iter().map(|x| x * x).sum();
    (Mat2::identity() - sigma_dot(c.c) * I) * C64::new(1.0 / (1.0 + c2).sqrt(), 0.0)
}

/// Parameters `k_a` with `B = sigma^a k_a`, `sigma^a = (I, sigma_k)`, normalized to `k^a k_a = 1`.
pub fn spinor_parameters(b: &Mat2) -> Result<[C64; 4]> {
    let mut k = [0, 1, 2, 3].map(|a| (pauli(a) * b).trace() * 0.5);
    let norm = k[0] * k[0] - k[1] * k[1] - k[2] * k[2] - k[3] * k[3];
    if norm.norm() < 1e-14 {
        return Err(IsoError::Domain("degenerate spinor parameters".into()));
    }
    let s = norm.sqrt();
    for x in &mut k {
        *x /= s;
    }
    Ok(k)
}

fn levi_civita4(a: usize, b: usize, c: usize, d: usize) -> f64 {
    let p = [a, b, c, d];
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] == p[j] {
                return 0.0;
            }
        }
    }
    let mut inv = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// Vector representation `L^a_b(k, k*)` of the spinor parameters:
///
/// ```text
/// L^a_b = dbar^c_b [ -delta^a_c k^n k*_n + k_c k^{a*} + k*_c k^a + i eps_c^{anm} k_n k*_m ]
/// ```
///
/// with `dbar = diag(1, -1, -1, -1)` and `eps_{0123} = +1`. The input `k` carries
/// lower indices and is rescaled to `k^a k_a = 1` first.
pub fn vector_rep(k: [C64; 4]) -> Result<Matrix4<f64>> {
    let norm = k[0] * k[0] - k[1] * k[1] - k[2] * k[2] - k[3] * k[3];
    if norm.norm() < 1e-14 {
        return Err(IsoError::Domain("degenerate spinor parameters".into()));
    }
    let s = norm.sqrt();
    let klow = k.map(|x| x / s);
    let kup: [C64; 4] = [0, 1, 2, 3].map(|a| klow[a] * ETA[a]);
    let nn: C64 = (0..4).map(|n| kup[n] * klow[n].conj()).sum();
    let mut l = Matrix4::zeros();
    for a in 0..4 {
        for b in 0..4 {
            let c = b;
            let mut v = kup[a].conj() * klow[c] + klow[c].conj() * kup[a];
            if a == c {
                v -= nn;
            }
            let mut t = C64::new(0.0, 0.0);
            for n in 0..4 {
                for m in 0..4 {
                    // eps_c^{anm} = eta_cc eps^{canm} and eps^{0123} = -1.
                    t += -ETA[c] * levi_civita4(c, a, n, m) * klow[n] * klow[m].conj();
                }
            }
            v += I * t;
            l[(a, b)] = ETA[b] * v.re;
        }
    }
    Ok(l)
}

/// The same representation from the spinor matrix itself:
/// `L = eta Lambda eta` with `Lambda_{ab} = tr(sigma_a B sigma_b B^dagger) / 2`.
pub fn vector_rep_from_spinor(b: &Mat2) -> Matrix4<f64> {
    let bd = b.adjoint();
    let mut l = Matrix4::zeros();
    for a in 0..4 {
        for c in 0..4 {
            let lam = (pauli(a) * b * pauli(c) * bd).trace() * 0.5;
            l[(a, c)] = ETA[a] * lam.re * ETA[c];
        }
    }
    l
}

/// The spatial 3x3 block of a 4x4 vector representation.
pub fn spatial_block(l: &Matrix4<f64>) -> Matrix3<f64> {
    l.fixed_view::<3, 3>(1, 1).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ONE;
    use std::f64::consts::PI;

    fn max_abs3(m: &Matrix3<f64>) -> f64 {
        m.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_gibbs_is_identity() {
        assert!(max_abs3(&(rotation_from_gibbs(&GibbsVector::new([0.0; 3])) - Matrix3::identity())) < 1e-15);
    }

    #[test]
    fn hedgehog_rotated_to_third_axis() {
        let (t, p) = (0.9, 2.3);
        let c = GibbsField::CartesianToDirac.value(1.0, t, p).unwrap();
        let c2 = gibbs_between(unit_radial(t, p), [0.0, 0.0, 1.0]).unwrap();
        for k in 0..3 {
            assert!((c.c[k] - c2.c[k]).abs() < 1e-14);
        }
        let y = rotation_from_gibbs(&c) * Vector3::from(unit_radial(t, p));
        assert!((y - Vector3::new(0.0, 0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn composite_matches_product_and_closed_form() {
        for &(t, p) in &[(0.3, 0.2), (1.2, -2.0), (2.5, 1.0)] {
            let c = GibbsField::CartesianToDirac.value(1.0, t, p).unwrap();
            let cp = GibbsField::DiracToSchwinger.value(1.0, t, p).unwrap();
            let prod = rotation_from_gibbs(&cp) * rotation_from_gibbs(&c);
            let cc = composite_gibbs(t, p).unwrap();
            assert!(max_abs3(&(rotation_from_gibbs(&cc) - prod)) < 1e-13);
            assert!(max_abs3(&(composite_rotation_closed_form(t, p) - prod)) < 1e-13);
            let comp = GibbsVector::compose(&cp, &c).unwrap();
            for k in 0..3 {
                assert!((comp.c[k] - cc.c[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn composite_pole_is_reported() {
        assert!(matches!(composite_gibbs(PI, 0.3), Err(IsoError::Pole(_))));
    }

    #[test]
    fn dirac_gauge_components() {
        let e = 0.7;
        let prof = ProfileFunctions::new("t", |r| 1.0 + r, |r| 0.5 * r, |r| 0.3 / (1.0 + r), e, 0.2);
        let p = PotentialSet::dirac(prof.clone());
        let (r, t, ph) = (1.3, 0.8, 2.1);
        let v = p.eval(r, t, ph).unwrap();
        let x = r * r * (prof.k_of_r)(r) + 1.0 / e;
        let expect_theta = [-x * ph.sin(), x * ph.cos(), 0.0];
        let expect_phi = [-x * t.sin() * ph.cos(), -x * t.sin() * ph.sin(), (t.cos() - 1.0) / e];
        for a in 0..3 {
            assert!((v.w[2][a] - expect_theta[a]).abs() < 1e-13);
            assert!((v.w[3][a] - expect_phi[a]).abs() < 1e-13);
            assert!(v.w[1][a].abs() < 1e-13);
        }
        assert!((v.w[0][2] - r * (prof.f_of_r)(r)).abs() < 1e-13);
        assert!((v.scalar[2] - r * (prof.phi_of_r)(r)).abs() < 1e-13);
    }

    #[test]
    fn spinor_matrix_properties() {
        let b = spinor_gauge_matrix(0.0, 0.0, 1.0);
        assert!((b - Mat2::identity()).norm() < 1e-15);
        let (t, p) = (1.1, 0.7);
        let b = spinor_gauge_matrix(t, p, 1.0);
        assert!((b * b.adjoint() - Mat2::identity()).norm() < 1e-15);
        assert!((b.determinant() - ONE).norm() < 1e-15);
        let bg = spinor_from_gibbs(&composite_gibbs(t, p).unwrap());
        assert!((b - bg).norm() < 1e-14 || (b + bg).norm() < 1e-14);
    }

    #[test]
    fn printed_vector_formula_matches_trace_form() {
        let b = spinor_gauge_matrix(PI / 3.0, PI / 4.0, 1.0);
        let k = spinor_parameters(&b).unwrap();
        let l = vector_rep(k).unwrap();
        let lt = vector_rep_from_spinor(&b);
        assert!((l - lt).abs().max() < 1e-13);
        let o = composite_rotation_closed_form(PI / 3.0, PI / 4.0);
        assert!(max_abs3(&(spatial_block(&l) - o)) < 1e-12);
        let neg = vector_rep(k.map(|x| -x)).unwrap();
        assert!((neg - l).abs().max() < 1e-15);
        // A boost-like SL(2,C) element.
        let boost = Mat2::new(C64::new(1.2, 0.3), C64::new(0.4, -0.1), C64::new(0.2, 0.5), C64::new(0.0, 0.0));
        let d = boost.determinant().sqrt();
        let boost = boost / d;
        let lk = vector_rep(spinor_parameters(&boost).unwrap()).unwrap();
        assert!((lk - vector_rep_from_spinor(&boost)).abs().max() < 1e-12);
    }
}
