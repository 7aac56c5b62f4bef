//! Composite scalar and pseudoscalar classification of observables under
//! `N_A`, parity folding of matrix-element integrands, the selection-rule
//! predicate, and the Abelian counterexample in which no such rule exists.
//!
//! Matrix elements are `int Psi-bar G Psi' dV` with `Psi-bar = Psi^dagger (I (x) gamma^0)`.
//! Since `u = r Psi`, the volume integral becomes `int dr dOmega u-bar G u'`.
//! For eigenstates `M(x) Psi(Px) = N Psi(x)` the integrand obeys
//! `f(x) = N N' Psi-bar(Px) [M(x)^dagger G(x) M(x)] Psi'(Px)`, so an observable
//! with `M(x)^dagger G(x) M(x) = Omega G(Px)` folds as
//! `f(Px) = Omega delta delta' (-1)^{j+j'} f(x)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{gamma, gamma5, parity_bispinor_spherical, pauli, re, Mat2, Mat4, Mat8, Vec8, ONE, ZERO};
use crate::angular::DoubletSection;
use crate::discrete::{n_operator_matrix, reflect_point, ChiralParameter, DiscreteOperatorSpec};
use crate::error::{IsoError, Result};
use crate::gauge::unit_radial;
use crate::halfint::{parity_phase, HalfInt};
use crate::quadrature::{simpson_weights, uniform_grid, SphereGrid};
use crate::wavefunctions::{build_abelian, frame_matrix, monopole_doublet, AbelianMonopoleState, DoubletState};
use crate::C64;

/// A bispinor-space matrix field `G(r, theta, phi)`.
pub type BispinorField = Arc<dyn Fn(f64, f64, f64) -> Mat4 + Send + Sync>;

/// Number of sample points used by [`classify`].
pub const CLASSIFY_SAMPLES: usize = 200;
/// Residual below which a classification is definite.
pub const CLASSIFY_TOL: f64 = 1e-10;
/// Seed of the deterministic sample stream used by [`classify`].
pub const CLASSIFY_SEED: u64 = 0x5e1ec7;

/// An observable `G(x) = (g_ij(x) G0(x))` with isotopic blocks `g_ij` and a
/// common bispinor factor `G0`, each a 4x4 field.
#[derive(Clone)]
pub struct ObservableSpec {
    pub isotopic_block: [[BispinorField; 2]; 2],
    pub lorentz_part: BispinorField,
    pub label: String,
}

impl fmt::Debug for ObservableSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObservableSpec").field("label", &self.label).finish_non_exhaustive()
    }
}

fn constant_field(m: Mat4) -> BispinorField {
    Arc::new(move |_, _, _| m)
}

impl ObservableSpec {
    /// An observable `iso (x) G0(x)` with a constant isotopic matrix.
    pub fn product(label: &str, iso: Mat2, lorentz: BispinorField) -> Self {
        let entry = |r: usize, c: usize| constant_field(Mat4::identity() * iso[(r, c)]);
        ObservableSpec {
            isotopic_block: [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]],
            lorentz_part: lorentz,
            label: label.to_string(),
        }
    }

    /// `iso (x) bisp` with both factors constant.
    pub fn constant(label: &str, iso: Mat2, bisp: Mat4) -> Self {
        Self::product(label, iso, constant_field(bisp))
    }

    /// The 8x8 matrix at `(r, theta, phi)`, isotopic-major.
    pub fn matrix(&self, r: f64, theta: f64, phi: f64) -> Mat8 {
        let g0 = (self.lorentz_part)(r, theta, phi);
        let mut m = Mat8::zeros();
        for a in 0..2 {
            for b in 0..2 {
                let blk = (self.isotopic_block[a][b])(r, theta, phi) * g0;
                m.fixed_view_mut::<4, 4>(4 * a, 4 * b).copy_from(&blk);
            }
        }
        m
    }

    /// `I (x) I`: the scalar density `Psi-bar Psi`.
    pub fn identity() -> Self {
        Self::constant("identity", Mat2::identity(), Mat4::identity())
    }

    /// Cartesian coordinate `x_k` (`k = 0, 1, 2`) times the identity.
    pub fn position(k: usize) -> Self {
        let label = format!("x{}", k + 1);
        Self::product(&label, Mat2::identity(), Arc::new(move |r, t, p| Mat4::identity() * re(r * unit_radial(t, p)[k])))
    }

    /// `x_k (I (x) gamma^0)`, whose matrix element is `int Psi^dagger x_k Psi' dV`.
    pub fn position_density(k: usize) -> Self {
        let label = format!("x{}_density", k + 1);
        Self::product(&label, Mat2::identity(), Arc::new(move |r, t, p| gamma(0) * re(r * unit_radial(t, p)[k])))
    }

    /// `sigma^3 (x) I`.
    pub fn isotopic_sigma3() -> Self {
        Self::constant("sigma3", pauli(3), Mat4::identity())
    }

    /// `z sigma^3 (x) I`.
    pub fn z_sigma3() -> Self {
        Self::product("z_sigma3", pauli(3), Arc::new(|r, t, _| Mat4::identity() * re(r * t.cos())))
    }

    /// `r^2 (3 cos^2 theta - 1) / 2` times the identity.
    pub fn quadrupole() -> Self {
        Self::product(
            "quadrupole",
            Mat2::identity(),
            Arc::new(|r, t, _| Mat4::identity() * re(r * r * (3.0 * t.cos().powi(2) - 1.0) / 2.0)),
        )
    }

    /// `gamma^5` pseudoscalar density.
    pub fn gamma5() -> Self {
        Self::constant("gamma5", Mat2::identity(), gamma5())
    }

    /// The off-diagonal probe `sigma^1 (x) gamma^0`.
    pub fn off_diagonal_probe() -> Self {
        Self::constant("sigma1_gamma0", pauli(1), gamma(0))
    }

    /// The off-diagonal probe `sigma^2 (x) gamma^0`.
    pub fn off_diagonal_probe2() -> Self {
        Self::constant("sigma2_gamma0", pauli(2), gamma(0))
    }

    /// `diag(e^{-g}, e^{g}) (x) I` for `A = f + i g`: a scalar for every `A`
    /// with the same imaginary part.
    pub fn adapted_diagonal(a: &ChiralParameter) -> Self {
        let g = a.g();
        let iso = Mat2::new(re((-g).exp()), ZERO, ZERO, re(g.exp()));
        Self::constant("adapted_diagonal", iso, Mat4::identity())
    }
}

/// The standard test corpus of observables.
pub fn observable_corpus() -> Vec<ObservableSpec> {
    let mut v = vec![ObservableSpec::identity()];
    v.extend((0..3).map(ObservableSpec::position));
    v.extend((0..3).map(ObservableSpec::position_density));
    v.push(ObservableSpec::isotopic_sigma3());
    v.push(ObservableSpec::z_sigma3());
    v.push(ObservableSpec::quadrupole());
    v.push(ObservableSpec::gamma5());
    v.push(ObservableSpec::off_diagonal_probe());
    v.push(ObservableSpec::off_diagonal_probe2());
    v
}

/// Composite parity `Omega` of an observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Omega {
    Plus,
    Minus,
    Indefinite,
}

impl Omega {
    /// `+1`, `-1`, or `None` when indefinite.
    pub fn sign(self) -> Option<i8> {
        match self {
            Omega::Plus => Some(1),
            Omega::Minus => Some(-1),
            Omega::Indefinite => None,
        }
    }
}

impl fmt::Display for Omega {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Omega::Plus => "+1",
            Omega::Minus => "-1",
            Omega::Indefinite => "indefinite",
        })
    }
}

/// Result of [`classify`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityClass {
    pub omega: Omega,
    pub a_context: ChiralParameter,
    /// `max |M^dagger G(x) M - G(Px)|` over the sample.
    pub residual_plus: f64,
    /// `max |M^dagger G(x) M + G(Px)|` over the sample.
    pub residual_minus: f64,
}

/// Deterministic sample points `(r, theta, phi)` with `r` in `[0.1, 5]`,
/// `cos(theta)` uniform and `phi` uniform.
pub fn classification_points(n: usize, seed: u64) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r = rng.random_range(0.1..5.0);
            let c: f64 = rng.random_range(-1.0..1.0);
            let p = rng.random_range(0.0..2.0 * PI);
            (r, c.acos(), p)
        })
        .collect()
}

/// Classifies `obs` under the Schwinger-gauge, spherical-tetrad `N_A`.
pub fn classify(obs: &ObservableSpec, a: ChiralParameter) -> ParityClass {
    classify_in(obs, &DiscreteOperatorSpec::schwinger(a))
}

/// Classifies `obs` under `N_A` in an arbitrary frame: tests
/// `M(x)^dagger G(x) M(x) = Omega G(Px)` at [`CLASSIFY_SAMPLES`] points.
pub fn classify_in(obs: &ObservableSpec, spec: &DiscreteOperatorSpec) -> ParityClass {
    let (mut rp, mut rm) = (0.0f64, 0.0f64);
    for (r, t, p) in classification_points(CLASSIFY_SAMPLES, CLASSIFY_SEED) {
        let m = n_operator_matrix(spec, t, p).matrix;
        let lhs = m.adjoint() * obs.matrix(r, t, p) * m;
        let (tr, pr) = reflect_point(t, p);
        let rhs = obs.matrix(r, tr, pr);
        for (x, y) in lhs.iter().zip(rhs.iter()) {
            rp = rp.max((x - y).norm());
            rm = rm.max((x + y).norm());
        }
    }
    let omega = if rp < CLASSIFY_TOL {
        Omega::Plus
    } else if rm < CLASSIFY_TOL {
        Omega::Minus
    } else {
        Omega::Indefinite
    };
    ParityClass { omega, a_context: spec.a, residual_plus: rp, residual_minus: rm }
}

/// Verdict of the selection-rule predicate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Selection {
    Vanishes,
    Allowed,
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Selection::Vanishes => "vanishes",
            Selection::Allowed => "allowed",
        })
    }
}

fn check_sign(name: &str, v: i8) -> Result<()> {
    if v == 1 || v == -1 {
        Ok(())
    } else {
        Err(IsoError::Domain(format!("{name} must be +1 or -1, got {v}")))
    }
}

/// The folding sign `Omega delta delta' (-1)^{j+j'}`.
pub fn fold_sign(omega: i8, j: HalfInt, jp: HalfInt, delta: i8, deltap: i8) -> Result<C64> {
    check_sign("omega", omega)?;
    check_sign("delta", delta)?;
    check_sign("delta'", deltap)?;
    Ok(parity_phase(j + jp) * f64::from(omega * delta * deltap))
}

/// `1 + Omega delta delta' (-1)^{j+j'}`: the factor multiplying the
/// half-space integral.
pub fn selection_factor(omega: i8, j: HalfInt, jp: HalfInt, delta: i8, deltap: i8) -> Result<C64> {
    Ok(ONE + fold_sign(omega, j, jp, delta, deltap)?)
}

/// Vanishes exactly when `1 + Omega delta delta' (-1)^{j+j'} = 0`.
pub fn selection_predicate(omega: i8, j: HalfInt, jp: HalfInt, delta: i8, deltap: i8) -> Result<Selection> {
    let f = selection_factor(omega, j, jp, delta, deltap)?;
    Ok(if f.norm() < 1e-12 { Selection::Vanishes } else { Selection::Allowed })
}

/// One row of the predicate truth table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub omega: i8,
    pub delta: i8,
    pub delta_prime: i8,
    pub j: HalfInt,
    pub j_prime: HalfInt,
    pub factor: f64,
    pub verdict: Selection,
}

/// Enumerates the predicate over `Omega, delta, delta'` and every pair from `js`.
pub fn truth_table(js: &[HalfInt]) -> Result<Vec<TruthRow>> {
    let mut rows = Vec::new();
    for omega in [1i8, -1] {
        for delta in [1i8, -1] {
            for deltap in [1i8, -1] {
                for &j in js {
                    for &jp in js {
                        let f = selection_factor(omega, j, jp, delta, deltap)?;
                        rows.push(TruthRow {
                            omega,
                            delta,
                            delta_prime: deltap,
                            j,
                            j_prime: jp,
                            factor: f.re,
                            verdict: selection_predicate(omega, j, jp, delta, deltap)?,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// The matrix element split by isotopic blocks of the frame in which the
/// states are expressed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixElement {
    /// Upper-upper block (`T_{+1/2}` in the Schwinger gauge).
    pub plus: C64,
    /// Lower-lower block.
    pub minus: C64,
    /// Upper-lower block alone.
    pub cross_upper_lower: C64,
    /// Lower-upper block alone.
    pub cross_lower_upper: C64,
    /// Both off-diagonal blocks.
    pub cross: C64,
    /// `plus + minus + cross`.
    pub total: C64,
    /// The total restricted to the half-space `theta < pi/2`.
    pub half_space: C64,
}

fn check_pair(bra: &DoubletState, ket: &DoubletState) -> Result<()> {
    if bra.gauge != ket.gauge || bra.tetrad != ket.tetrad {
        return Err(IsoError::Frame(format!(
            "bra is in ({:?}, {:?}) but ket is in ({:?}, {:?})",
            bra.gauge, bra.tetrad, ket.gauge, ket.tetrad
        )));
    }
    let (gb, gk) = (&bra.radial.grid, &ket.radial.grid);
    if gb.len() != gk.len() || gb.iter().zip(gk).any(|(x, y)| (x - y).abs() > 1e-12) {
        return Err(IsoError::Domain("bra and ket live on different radial grids".into()));
    }
    Ok(())
}

/// Angular basis `B(theta, phi)` with `u(r_i) = B a_i` for the ansatz amplitudes `a_i`.
fn angular_basis(state: &DoubletState, theta: f64, phi: f64) -> Mat8 {
    let d = DoubletSection::ansatz(state.j, state.m, [ONE; 4], [ONE; 4]).eval(theta, phi);
    frame_matrix(state.gauge, state.tetrad, theta, phi) * Mat8::from_diagonal(&Vec8::from_vec(d))
}

fn bar_blocks(u: &Vec8, gm: &Mat8, v: &Vec8) -> [C64; 4] {
    let g0 = gamma(0);
    let mut out = [ZERO; 4];
    for a in 0..2 {
        let ua = u.fixed_rows::<4>(4 * a).into_owned();
        let bar = ua.adjoint() * g0;
        for b in 0..2 {
            let vb = v.fixed_rows::<4>(4 * b).into_owned();
            let blk = gm.fixed_view::<4, 4>(4 * a, 4 * b).into_owned();
            out[2 * a + b] = (bar * blk * vb)[(0, 0)];
        }
    }
    out
}

/// The angular integrand `u-bar(x) G(x) u'(x)` at radial node `i`.
pub fn integrand(bra: &DoubletState, obs: &ObservableSpec, ket: &DoubletState, i: usize, theta: f64, phi: f64) -> C64 {
    let u = Vec8::from_row_slice(&bra.eval(i, theta, phi));
    let v = Vec8::from_row_slice(&ket.eval(i, theta, phi));
    let r = bra.radial.grid[i];
    bar_blocks(&u, &obs.matrix(r, theta, phi), &v).iter().sum()
}

/// `int Psi-bar G Psi' dV` by Simpson weights on the states' radial grid and
/// the product rule of `grid` on the sphere.
pub fn matrix_element(
    bra: &DoubletState,
    obs: &ObservableSpec,
    ket: &DoubletState,
    grid: &SphereGrid,
) -> Result<MatrixElement> {
    check_pair(bra, ket)?;
    let rs = &bra.radial.grid;
    let rw = simpson_weights(rs)?;
    let upper = grid.upper_half();
    let rows: Vec<[C64; 4]> = (0..grid.theta.len())
        .into_par_iter()
        .map(|it| {
            let t = grid.theta[it];
            let mut acc = [ZERO; 4];
            for (ip, &p) in grid.phi.iter().enumerate() {
                let w = grid.weight(it, ip);
                let bb = angular_basis(bra, t, p);
                let bk = angular_basis(ket, t, p);
                for (k, &r) in rs.iter().enumerate() {
                    let u = bb * Vec8::from_row_slice(&bra.amplitudes[k]);
                    let v = bk * Vec8::from_row_slice(&ket.amplitudes[k]);
                    let blocks = bar_blocks(&u, &obs.matrix(r, t, p), &v);
                    for q in 0..4 {
                        acc[q] += blocks[q] * (w * rw[k]);
                    }
                }
            }
            acc
        })
        .collect();
    let (mut plus, mut minus, mut ul, mut lu, mut half) = (ZERO, ZERO, ZERO, ZERO, ZERO);
    for (it, b) in rows.iter().enumerate() {
        plus += b[0];
        ul += b[1];
        lu += b[2];
        minus += b[3];
        if upper.contains(&it) {
            half += b[0] + b[1] + b[2] + b[3];
        }
    }
    let cross = ul + lu;
    Ok(MatrixElement {
        plus,
        minus,
        cross_upper_lower: ul,
        cross_lower_upper: lu,
        cross,
        total: plus + minus + cross,
        half_space: half,
    })
}

/// `max |f(Px) - s f(x)|` at radial node `i` over `points`, with `s` the
/// folding sign for `omega`, relative to `max |u| |G| |u'|` on the same points.
pub fn folding_residual(
    bra: &DoubletState,
    obs: &ObservableSpec,
    ket: &DoubletState,
    omega: i8,
    i: usize,
    points: &[(f64, f64)],
) -> Result<f64> {
    check_pair(bra, ket)?;
    let s = fold_sign(omega, bra.j, ket.j, bra.delta, ket.delta)?;
    let r = bra.radial.grid[i];
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for &(t, p) in points {
        let (tr, pr) = reflect_point(t, p);
        let f = integrand(bra, obs, ket, i, t, p);
        let fr = integrand(bra, obs, ket, i, tr, pr);
        worst = worst.max((fr - s * f).norm());
        let u = Vec8::from_row_slice(&bra.eval(i, t, p));
        let v = Vec8::from_row_slice(&ket.eval(i, t, p));
        let g = obs.matrix(r, t, p).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        scale = scale.max(u.norm() * v.norm() * g);
    }
    Ok(if scale > 0.0 { worst / scale } else { 0.0 })
}

/// One case of the predicate-versus-quadrature sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub observable: String,
    pub omega: i8,
    pub a: ChiralParameter,
    pub j: HalfInt,
    pub delta: i8,
    pub j_prime: HalfInt,
    pub delta_prime: i8,
    pub predicate: Selection,
    pub value: C64,
    pub half_space: C64,
}

/// Radial grid shared by the sweep states.
pub fn sweep_radial_grid() -> Vec<f64> {
    uniform_grid(0.5, 4.0, 9)
}

/// A sweep state: `m = 1`, `mu = +1`, energy 2, mass 1 in the simplest monopole field.
pub fn sweep_state(j: i64, delta: i8, a: ChiralParameter) -> Result<DoubletState> {
    monopole_doublet(HalfInt::int(j), HalfInt::ONE, delta, Some(1), a, 2.0, 1.0, &sweep_radial_grid())
}

/// The 30 sweep cases `(observable, j, delta, j', delta', A)`.
///
/// Every state has `m = 1` and `mu = +1`. Each observable is paired only
/// with `(j, j')` allowed by the triangle rule for its angular rank, because
/// the predicate concerns the parity factor alone. At `m = 0` the reduced
/// rotation functions obey an extra reflection symmetry that forces further
/// zeros, and observables commuting with `K` vanish between different `mu`.
pub fn sweep_cases() -> Vec<(ObservableSpec, i64, i8, i64, i8, f64)> {
    let mut out = Vec::new();
    let same_j = [(1, 1, 1, 1), (1, 1, 1, -1), (2, 2, -1, -1), (2, 2, 1, -1), (1, 1, -1, -1), (2, 2, -1, 1)];
    let rank1 = [(1, 1, 1, 1), (1, 1, 1, -1), (1, 2, 1, 1), (1, 2, -1, 1), (2, 2, 1, 1), (2, 1, -1, -1)];
    let rank2 = [(1, 1, 1, 1), (1, 1, -1, 1), (1, 2, 1, 1), (1, 2, 1, -1), (2, 2, 1, 1), (2, 2, 1, -1)];
    let push = |out: &mut Vec<_>, obs: ObservableSpec, cases: &[(i64, i64, i8, i8)], a: f64| {
        for &(j, jp, d, dp) in cases {
            out.push((obs.clone(), j, d, jp, dp, a));
        }
    };
    push(&mut out, ObservableSpec::identity(), &same_j, 0.0);
    push(&mut out, ObservableSpec::isotopic_sigma3(), &same_j, 0.7);
    push(&mut out, ObservableSpec::position_density(2), &rank1, 0.0);
    push(&mut out, ObservableSpec::z_sigma3(), &rank1, 0.7);
    push(&mut out, ObservableSpec::quadrupole(), &rank2, 0.0);
    out
}

/// Runs the sweep: classification, predicate and quadrature for every case.
pub fn predicate_sweep(grid: &SphereGrid) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for (obs, j, d, jp, dp, a) in sweep_cases() {
        let a = ChiralParameter::real(a)?;
        let omega = classify(&obs, a)
            .omega
            .sign()
            .ok_or_else(|| IsoError::Domain(format!("observable {} is not definite at A = {a}", obs.label)))?;
        let bra = sweep_state(j, d, a)?;
        let ket = sweep_state(jp, dp, a)?;
        let me = matrix_element(&bra, &obs, &ket, grid)?;
        rows.push(SweepRow {
            observable: obs.label.clone(),
            omega,
            a,
            j: bra.j,
            delta: d,
            j_prime: ket.j,
            delta_prime: dp,
            predicate: selection_predicate(omega, bra.j, ket.j, d, dp)?,
            value: me.total,
            half_space: me.half_space,
        });
    }
    Ok(rows)
}

/// Outcome of [`abelian_no_rule_demo`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbelianReport {
    pub eg: HalfInt,
    pub j: HalfInt,
    pub m: HalfInt,
    pub mu: Option<i8>,
    /// The factor `mu (-1)^{j+1}` (or `(-1)^{j+1}` at minimal `j`).
    pub factor: C64,
    /// `max |P_bisp Phi^{+eg}(Px) - factor Phi^{-eg}(x)|` relative to `max |Phi|`.
    pub charge_flip_residual: f64,
    /// Relative residual of `M Phi = factor Phi` with `M` flipping `eg`.
    pub m_eigen_residual: f64,
    /// Best member of the Clifford candidate family for `Phi(Px) = c C Phi(x)`.
    pub best_candidate: String,
    pub best_candidate_constant: C64,
    pub best_candidate_residual: f64,
    /// Relative residual of the least-squares fit over all constant 4x4 matrices.
    pub general_matrix_residual: f64,
    /// Whether some constant matrix relates `Phi(Px)` to `Phi(x)`.
    pub same_function_relation: bool,
}

/// Relative residual above which no same-function relation is declared.
pub const NEGATIVE_CONTROL_FLOOR: f64 = 1e-3;

fn probe_pair(grid: &[f64]) -> Vec<[C64; 2]> {
    grid.iter()
        .map(|&r| {
            let e = (-r / 2.0).exp();
            [re(r * e), C64::new(0.4 + r * r / 3.0, 0.2 * r) * e]
        })
        .collect()
}

fn probe_angles() -> Vec<(f64, f64)> {
    let mut v = Vec::new();
    for &t in &[0.35, 0.8, 1.2, 1.9, 2.4, 2.9] {
        for &p in &[0.1, 1.3, 2.7, 4.4, 5.9] {
            v.push((t, p));
        }
    }
    v
}

/// The 16 Clifford products `I, gamma^mu, gamma^mu gamma^nu (mu < nu), gamma^5 gamma^mu, gamma^5`.
pub fn clifford_family() -> Vec<(String, Mat4)> {
    let mut v = vec![("I".to_string(), Mat4::identity())];
    for mu in 0..4 {
        v.push((format!("g{mu}"), gamma(mu)));
    }
    for mu in 0..4 {
        for nu in (mu + 1)..4 {
            v.push((format!("g{mu}g{nu}"), gamma(mu) * gamma(nu)));
        }
    }
    for mu in 0..4 {
        v.push((format!("g5g{mu}"), gamma5() * gamma(mu)));
    }
    v.push(("g5".to_string(), gamma5()));
    v
}

fn max_norm(v: &nalgebra::Vector4<C64>) -> f64 {
    v.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

fn col(v: &[C64]) -> nalgebra::Vector4<C64> {
    nalgebra::Vector4::new(v[0], v[1], v[2], v[3])
}

/// Demonstrates that for `eg != 0` only the charge-flipping reflection
/// relation holds, while no constant matrix relates `Phi(Px)` to `Phi(x)`;
/// for `eg = 0` the same-function relation is recovered.
pub fn abelian_no_rule_demo(eg: HalfInt, j: HalfInt, m: HalfInt, mu: Option<i8>) -> Result<AbelianReport> {
    let grid = uniform_grid(0.5, 3.0, 6);
    let pair = probe_pair(&grid);
    let plus = build_abelian(eg, j, m, 1.0, mu, grid.clone(), &pair)?;
    let (partner_pair, factor) = if plus.is_minimal() {
        (pair.iter().map(|p| [p[1], p[0]]).collect::<Vec<_>>(), parity_phase(j + HalfInt::ONE))
    } else {
        let mu = plus.mu.expect("non-minimal state carries mu");
        (pair.clone(), parity_phase(j + HalfInt::ONE) * f64::from(mu))
    };
    let minus = build_abelian(-eg, j, m, 1.0, plus.mu, grid.clone(), &partner_pair)?;
    let p = parity_bispinor_spherical();
    let angles = probe_angles();

    let mut flip = 0.0f64;
    let mut eig = 0.0f64;
    let mut scale = 0.0f64;
    let mut xs: Vec<nalgebra::Vector4<C64>> = Vec::new();
    let mut ys: Vec<nalgebra::Vector4<C64>> = Vec::new();
    for i in 0..grid.len() {
        for &(t, ph) in &angles {
            let (tr, pr) = reflect_point(t, ph);
            let x = col(&plus.eval(i, t, ph));
            let y = col(&plus.eval(i, tr, pr));
            let flipped = p * y;
            let target = col(&minus.eval(i, t, ph)) * factor;
            flip = flip.max(max_norm(&(flipped - target)));
            // M Phi^{+eg}(x) = P_bisp Phi^{-eg}(Px).
            let m_phi = p * col(&minus.eval(i, tr, pr));
            eig = eig.max(max_norm(&(m_phi - x * factor)));
            scale = scale.max(max_norm(&x));
            xs.push(x);
            ys.push(y);
        }
    }
    let scale = scale.max(f64::MIN_POSITIVE);

    let norm_y: f64 = ys.iter().map(|y| y.norm_squared()).sum::<f64>().sqrt();
    let mut best = (String::new(), ZERO, f64::INFINITY);
    for (label, c_mat) in clifford_family() {
        let cx: Vec<_> = xs.iter().map(|x| c_mat * x).collect();
        let den: f64 = cx.iter().map(|v| v.norm_squared()).sum();
        let num: C64 = cx.iter().zip(&ys).map(|(v, y)| v.dotc(y)).sum();
        let c = if den > 0.0 { num / den } else { ZERO };
        let res: f64 = cx.iter().zip(&ys).map(|(v, y)| (y - v * c).norm_squared()).sum::<f64>().sqrt() / norm_y;
        if res < best.2 {
            best = (label, c, res);
        }
    }

    let n = xs.len();
    let xm = DMatrix::from_fn(4, n, |r, c| xs[c][r]);
    let ym = DMatrix::from_fn(4, n, |r, c| ys[c][r]);
    let pinv = xm.clone().pseudo_inverse(1e-12).map_err(|e| IsoError::Domain(e.to_string()))?;
    let fit = &ym * pinv;
    let general = (&ym - fit * xm).norm() / ym.norm();

    Ok(AbelianReport {
        eg,
        j,
        m,
        mu: plus.mu,
        factor,
        charge_flip_residual: flip / scale,
        m_eigen_residual: eig / scale,
        best_candidate: best.0,
        best_candidate_constant: best.1,
        best_candidate_residual: best.2,
        general_matrix_residual: general,
        same_function_relation: general < NEGATIVE_CONTROL_FLOOR,
    })
}

/// An Abelian state built on the probe profiles used by [`abelian_no_rule_demo`].
pub fn abelian_probe_state(eg: HalfInt, j: HalfInt, m: HalfInt, mu: Option<i8>) -> Result<AbelianMonopoleState> {
    let grid = uniform_grid(0.5, 3.0, 6);
    let pair = probe_pair(&grid);
    build_abelian(eg, j, m, 1.0, mu, grid, &pair)
}

/// The off-diagonal probe `[[0, e^{i phase}], [e^{-i phase}, 0]] (x) gamma^0`.
pub fn phase_probe(phase: f64) -> ObservableSpec {
    let c = C64::from_polar(1.0, phase);
    let iso = Mat2::new(ZERO, c, c.conj(), ZERO);
    ObservableSpec::constant(&format!("phase_probe({phase})"), iso, gamma(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{Gauge, Tetrad};
    use crate::wavefunctions::{to_gauge, to_tetrad};

    fn real(a: f64) -> ChiralParameter {
        ChiralParameter::real(a).unwrap()
    }

    fn small_grid() -> SphereGrid {
        SphereGrid::new(24, 32).unwrap()
    }

    fn omega_of(obs: &ObservableSpec, a: ChiralParameter) -> Omega {
        classify(obs, a).omega
    }

    #[test]
    fn corpus_classification_at_zero_a() {
        let a = ChiralParameter::zero();
        let expect = [
            ("identity", Omega::Plus),
            ("x1", Omega::Minus),
            ("x2", Omega::Minus),
            ("x3", Omega::Minus),
            ("x1_density", Omega::Minus),
            ("x2_density", Omega::Minus),
            ("x3_density", Omega::Minus),
            ("sigma3", Omega::Minus),
            ("z_sigma3", Omega::Plus),
            ("quadrupole", Omega::Plus),
            ("gamma5", Omega::Minus),
            ("sigma1_gamma0", Omega::Plus),
            ("sigma2_gamma0", Omega::Minus),
        ];
        let corpus = observable_corpus();
        assert_eq!(corpus.len(), expect.len());
        for (obs, (label, om)) in corpus.iter().zip(expect) {
            assert_eq!(obs.label, label);
            assert_eq!(omega_of(obs, a), om, "{label}");
        }
    }

    #[test]
    fn classification_depends_on_a() {
        let probe = ObservableSpec::off_diagonal_probe();
        assert_eq!(omega_of(&probe, real(0.0)), Omega::Plus);
        assert_eq!(omega_of(&probe, real(std::f64::consts::FRAC_PI_4)), Omega::Indefinite);
        assert_eq!(omega_of(&probe, real(std::f64::consts::FRAC_PI_2)), Omega::Minus);
        // A phase-matched probe is definite where sigma^1 is not.
        let matched = phase_probe(-std::f64::consts::FRAC_PI_4);
        assert_eq!(omega_of(&matched, real(std::f64::consts::FRAC_PI_4)), Omega::Plus);
        // Complex A spoils the identity but not the adapted diagonal.
        let a = ChiralParameter::from_parts(0.3, 0.4).unwrap();
        assert_eq!(omega_of(&ObservableSpec::identity(), a), Omega::Indefinite);
        assert_eq!(omega_of(&ObservableSpec::position(2), a), Omega::Indefinite);
        assert_eq!(omega_of(&ObservableSpec::adapted_diagonal(&a), a), Omega::Plus);
        // Real A leaves diagonal observables unchanged.
        for obs in [ObservableSpec::identity(), ObservableSpec::position(0), ObservableSpec::isotopic_sigma3()] {
            assert_eq!(omega_of(&obs, real(1.1)), omega_of(&obs, real(0.0)), "{}", obs.label);
        }
    }

    #[test]
    fn classification_in_other_frames() {
        let a = real(0.6);
        for gauge in [Gauge::Schwinger, Gauge::Dirac, Gauge::Cartesian] {
            for tetrad in [Tetrad::Spherical, Tetrad::Cartesian] {
                let spec = DiscreteOperatorSpec { gauge, tetrad, a };
                assert_eq!(classify_in(&ObservableSpec::identity(), &spec).omega, Omega::Plus);
                assert_eq!(classify_in(&ObservableSpec::position(1), &spec).omega, Omega::Minus);
                assert_eq!(classify_in(&ObservableSpec::position_density(2), &spec).omega, Omega::Minus);
            }
        }
    }

    #[test]
    fn predicate_examples_and_table() {
        let j1 = HalfInt::ONE;
        assert_eq!(selection_predicate(-1, j1, j1, 1, 1).unwrap(), Selection::Vanishes);
        assert_eq!(selection_predicate(1, j1, j1, 1, 1).unwrap(), Selection::Allowed);
        assert_eq!(selection_predicate(1, j1, HalfInt::int(3), -1, -1).unwrap(), Selection::Allowed);
        // The position operator between identical labels: 1 - delta^2 (-1)^{2j} = 0.
        for j in 0..4 {
            for d in [1i8, -1] {
                let jj = HalfInt::int(j);
                assert_eq!(selection_predicate(-1, jj, jj, d, d).unwrap(), Selection::Vanishes);
            }
        }
        assert!(selection_predicate(0, j1, j1, 1, 1).is_err());
        let rows = truth_table(&[HalfInt::ONE, HalfInt::int(2)]).unwrap();
        assert_eq!(rows.len(), 32);
        assert_eq!(rows.iter().filter(|r| r.verdict == Selection::Vanishes).count(), 16);
        for r in &rows {
            let sign = i64::from(r.omega * r.delta * r.delta_prime)
                * if (r.j + r.j_prime).to_int().unwrap() % 2 == 0 { 1 } else { -1 };
            assert_eq!(r.verdict == Selection::Vanishes, sign == -1);
        }
    }

    #[test]
    fn position_expectation_vanishes() {
        let grid = small_grid();
        for a in [0.0, 0.9] {
            for (j, m) in [(0, 0), (1, 0), (1, 1), (2, -1)] {
                for d in [1i8, -1] {
                    for mu in [1i8, -1] {
                        let st = monopole_doublet(
                            HalfInt::int(j),
                            HalfInt::int(m),
                            d,
                            Some(mu),
                            real(a),
                            2.0,
                            1.0,
                            &sweep_radial_grid(),
                        )
                        .unwrap();
                        let norm = matrix_element(&st, &ObservableSpec::position_density(0), &st, &grid).unwrap();
                        let scale = matrix_element(&st, &ObservableSpec::constant("n", Mat2::identity(), gamma(0)), &st, &grid)
                            .unwrap()
                            .total
                            .norm();
                        assert!(scale > 1e-3);
                        for k in 0..3 {
                            let me = matrix_element(&st, &ObservableSpec::position_density(k), &st, &grid).unwrap();
                            assert!(me.total.norm() < 1e-8 * scale.max(1.0), "j={j} m={m} k={k}: {}", me.total);
                        }
                        assert!(norm.cross.norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn complex_a_moves_the_centre() {
        // With g != 0 the two isotopic halves carry weights 1 and e^{-2g}, and
        // the z-moments of the halves are opposite, so <z> is proportional to 1 - e^{-2g}.
        let grid = small_grid();
        let z = ObservableSpec::position_density(2);
        let s0 = sweep_state(1, 1, real(0.0)).unwrap();
        let a = ChiralParameter::from_parts(0.2, 0.35).unwrap();
        let s1 = sweep_state(1, 1, a).unwrap();
        let m0 = matrix_element(&s0, &z, &s0, &grid).unwrap();
        let m1 = matrix_element(&s1, &z, &s1, &grid).unwrap();
        assert!((m0.plus + m0.minus).norm() < 1e-10 * m0.plus.norm());
        assert!((m1.plus - m0.plus).norm() < 1e-8 * m0.plus.norm());
        assert!((m1.minus - m0.minus * a.modulus_factor()).norm() < 1e-8 * m0.plus.norm());
        let expected = m0.plus * (1.0 - a.modulus_factor());
        assert!((m1.total - expected).norm() < 1e-8 * m0.plus.norm());
        assert!(m1.total.norm() > 1e-3);
    }

    #[test]
    fn three_term_structure() {
        let grid = small_grid();
        let probe = ObservableSpec::off_diagonal_probe();
        for (d, mu) in [(1i8, 1i8), (-1, 1), (1, -1)] {
            let a = ChiralParameter::from_parts(0.5, -0.25).unwrap();
            let mk = |a| {
                monopole_doublet(HalfInt::ONE, HalfInt::ZERO, d, Some(mu), a, 2.0, 1.0, &sweep_radial_grid()).unwrap()
            };
            let (s0, s1) = (mk(real(0.0)), mk(a));
            let m0 = matrix_element(&s0, &probe, &s0, &grid).unwrap();
            let m1 = matrix_element(&s1, &probe, &s1, &grid).unwrap();
            let x = m0.cross_upper_lower * f64::from(d * mu);
            let expected = 2.0 * f64::from(d * mu) * (a.delta() * x).re;
            assert!((m1.cross - expected).norm() < 1e-9 * x.norm().max(1.0), "{} vs {expected}", m1.cross);
            assert!(m1.plus.norm() < 1e-12 && m1.minus.norm() < 1e-12);
            let diag = matrix_element(&s1, &ObservableSpec::isotopic_sigma3(), &s1, &grid).unwrap();
            assert!(diag.cross.norm() < 1e-10);
        }
    }

    #[test]
    fn frame_mismatch_is_rejected() {
        let s = sweep_state(1, 1, real(0.0)).unwrap();
        let t = to_gauge(&s, Gauge::Dirac);
        assert!(matches!(
            matrix_element(&s, &ObservableSpec::identity(), &t, &small_grid()),
            Err(IsoError::Frame(_))
        ));
        let u = to_tetrad(&s, Tetrad::Cartesian);
        assert!(matches!(folding_residual(&s, &ObservableSpec::identity(), &u, 1, 0, &[(0.3, 0.2)]), Err(IsoError::Frame(_))));
    }

    #[test]
    fn matrix_elements_are_frame_independent() {
        let grid = small_grid();
        let a = real(0.4);
        let bra = sweep_state(1, 1, a).unwrap();
        let ket = sweep_state(2, 1, a).unwrap();
        let obs = ObservableSpec::position_density(2);
        let base = matrix_element(&bra, &obs, &ket, &grid).unwrap().total;
        assert!(base.norm() > 1e-3);
        for tetrad in [Tetrad::Spherical, Tetrad::Cartesian] {
            for gauge in [Gauge::Dirac, Gauge::Cartesian] {
                let b = to_tetrad(&to_gauge(&bra, gauge), tetrad);
                let k = to_tetrad(&to_gauge(&ket, gauge), tetrad);
                let v = matrix_element(&b, &obs, &k, &grid).unwrap().total;
                assert!((v - base).norm() < 1e-10, "{gauge:?} {tetrad:?}");
            }
        }
    }

    #[test]
    fn folding_identity_pointwise_and_half_space() {
        let grid = small_grid();
        let points = [(0.3, 0.2), (1.1, 2.0), (1.5, 4.1), (2.2, 5.5), (2.9, 1.0)];
        for a in [0.0, 0.8] {
            let a = real(a);
            let states: Vec<_> = (0..3)
                .flat_map(|j| [1i8, -1].into_iter().map(move |d| (j, d)))
                .map(|(j, d)| {
                    let m = HalfInt::int(j.min(1));
                    monopole_doublet(HalfInt::int(j), m, d, Some(1), a, 2.0, 1.0, &sweep_radial_grid()).unwrap()
                })
                .collect();
            for obs in observable_corpus() {
                let Some(om) = classify(&obs, a).omega.sign() else { continue };
                for bra in &states {
                    for ket in &states {
                        for i in [1, 5] {
                            let r = folding_residual(bra, &obs, ket, om, i, &points).unwrap();
                            assert!(r < 1e-10, "{} j={} j'={}: {r}", obs.label, bra.j, ket.j);
                        }
                    }
                }
                let (bra, ket) = (&states[2], &states[5]);
                let me = matrix_element(bra, &obs, ket, &grid).unwrap();
                let f = selection_factor(om, bra.j, ket.j, bra.delta, ket.delta).unwrap();
                assert!((me.total - f * me.half_space).norm() < 1e-8 * me.half_space.norm().max(1.0), "{}", obs.label);
            }
        }
    }

    #[test]
    fn abelian_charge_flip_and_no_same_function_relation() {
        let h = HalfInt::HALF;
        let cases = [
            (h, HalfInt::ONE, HalfInt::ONE, Some(1i8)),
            (h, HalfInt::int(2), HalfInt::ONE, Some(-1)),
            (h, HalfInt::int(2), -HalfInt::int(2), Some(1)),
            (-h, HalfInt::ONE, HalfInt::ONE, Some(1)),
            (HalfInt::ONE, h, h, None),
            (HalfInt::ONE, HalfInt::from_twice(3), -h, Some(1)),
            (HalfInt::from_twice(3), HalfInt::ONE, HalfInt::ONE, None),
        ];
        for (eg, j, m, mu) in cases {
            let rep = abelian_no_rule_demo(eg, j, m, mu).unwrap();
            assert!(rep.charge_flip_residual < 1e-12, "{eg} {j}: {}", rep.charge_flip_residual);
            assert!(rep.m_eigen_residual < 1e-12, "{eg} {j}: {}", rep.m_eigen_residual);
            let expected = parity_phase(j + HalfInt::ONE) * f64::from(mu.unwrap_or(1));
            assert!((rep.factor - expected).norm() < 1e-15);
            assert!(!rep.same_function_relation, "{eg} {j}: {}", rep.general_matrix_residual);
            assert!(rep.best_candidate_residual > NEGATIVE_CONTROL_FLOOR);
        }
        // eg = 0: the relation closes on the same function, with P_bisp as the matrix.
        for (j, mu) in [(h, 1i8), (HalfInt::from_twice(3), -1)] {
            let rep = abelian_no_rule_demo(HalfInt::ZERO, j, h, Some(mu)).unwrap();
            assert!(rep.charge_flip_residual < 1e-12);
            assert!(rep.same_function_relation);
            assert!(rep.general_matrix_residual < 1e-10);
            assert!(rep.best_candidate_residual < 1e-10);
        }
        // At m = 0 and integer j, d^j_{0,-s} = (-1)^s d^j_{0,s}, so the reflected
        // function is again a fixed matrix times the original one.
        for (eg, j, mu) in [(h, HalfInt::ONE, Some(1i8)), (h, HalfInt::ZERO, None), (-h, HalfInt::int(2), Some(-1))] {
            let rep = abelian_no_rule_demo(eg, j, HalfInt::ZERO, mu).unwrap();
            assert!(rep.charge_flip_residual < 1e-12);
            assert!(rep.same_function_relation, "{eg} {j}");
        }
        assert!(abelian_no_rule_demo(h, h, h, Some(1)).is_err());
    }

    #[test]
    fn predicate_agrees_with_quadrature() {
        let rows = predicate_sweep(&SphereGrid::new(32, 64).unwrap()).unwrap();
        assert_eq!(rows.len(), 30);
        for r in &rows {
            let zero = r.value.norm() < 1e-7;
            assert_eq!(zero, r.predicate == Selection::Vanishes, "{r:?}");
        }
    }
}
