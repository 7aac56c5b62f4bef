//! Separated radial systems of the doublet, their reductions by `N_A` and `K`,
//! and numerical solution with regular or scattering boundary data.
//!
//! Every system is stored as `D y' + E(r) y = 0` with
//! `E(r) = E_c + E_inv / r + F~(r) E_f + Phi~(r) E_phi + (W(r) / r) E_w`,
//! where `E_c` already contains the energy and mass. Rows are equations and
//! columns are unknowns; reductions substitute a constant linkage matrix and
//! keep one equation from every group of proportional rows.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::{re, I, ONE, ZERO};
use crate::angular::nu;
use crate::discrete::{eigen_constraints, ChiralParameter};
use crate::error::{IsoError, Result};
use crate::gauge::ProfileFunctions;
use crate::halfint::HalfInt;
use crate::ode::{integrate_to_points, rk4, State, Tolerance};
use crate::special::{bessel_jy, hankel1, hankel2};

/// Which printed system a [`RadialSystem`] represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    /// Eight equations for `j > 0`.
    GeneralJ,
    /// Four equations for `j = 0`.
    JZero,
    /// `N_A` linkage applied, before the `W` classification.
    NReduced,
    /// `j > 0`, `W = 0`: four equations in `f1..f4`.
    FreeReduced,
    /// `j > 0`, `W != 0`, `e^{iA} = +-1`.
    WNonzeroReduced,
    /// `j = 0`, `W = 0`: two equations in `(f2, f4)`.
    J0Free,
    /// `j = 0`, `W != 0`, `e^{iA} = +-1`.
    J0W,
    /// `K` linkage applied to the free-reduced system: two equations in `(f1, f2)`.
    KReduced,
}

impl CaseTag {
    /// Number of unknowns of a system with this tag.
    pub fn size(&self) -> usize {
        match self {
            CaseTag::GeneralJ => 8,
            CaseTag::JZero | CaseTag::NReduced | CaseTag::FreeReduced | CaseTag::WNonzeroReduced => 4,
            CaseTag::J0Free | CaseTag::J0W | CaseTag::KReduced => 2,
        }
    }
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        f.write_str(&s)
    }
}

/// Constant coefficient matrices of a radial system.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficients {
    pub d: DMatrix<C64>,
    pub e_const: DMatrix<C64>,
    pub e_inv: DMatrix<C64>,
    pub e_f: DMatrix<C64>,
    pub e_phi: DMatrix<C64>,
    pub e_w: DMatrix<C64>,
}

impl Coefficients {
    fn zeros(rows: usize, cols: usize) -> Self {
        let z = DMatrix::zeros(rows, cols);
        Coefficients { d: z.clone(), e_const: z.clone(), e_inv: z.clone(), e_f: z.clone(), e_phi: z.clone(), e_w: z }
    }

    fn all(&self) -> [&DMatrix<C64>; 6] {
        [&self.d, &self.e_const, &self.e_inv, &self.e_f, &self.e_phi, &self.e_w]
    }

    fn map(&self, f: impl Fn(&DMatrix<C64>) -> DMatrix<C64>) -> Self {
        Coefficients {
            d: f(&self.d),
            e_const: f(&self.e_const),
            e_inv: f(&self.e_inv),
            e_f: f(&self.e_f),
            e_phi: f(&self.e_phi),
            e_w: f(&self.e_w),
        }
    }

    fn rows(&self, idx: &[usize]) -> Self {
        self.map(|m| m.select_rows(idx))
    }

    /// `E(r)` for given profile values.
    fn e_at(&self, r: f64, w: f64, ft: f64, pt: f64) -> DMatrix<C64> {
        &self.e_const + &self.e_inv * re(1.0 / r) + &self.e_f * re(ft) + &self.e_phi * re(pt) + &self.e_w * re(w / r)
    }
}

/// A first-order radial system `D y' + E(r) y = 0`.
#[derive(Clone, Debug)]
pub struct RadialSystem {
    pub case_tag: CaseTag,
    pub j: HalfInt,
    pub nu: f64,
    pub epsilon: f64,
    pub mass: f64,
    pub profiles: ProfileFunctions,
    pub delta: Option<i8>,
    pub a: Option<ChiralParameter>,
    pub mu: Option<i8>,
    /// Names of the unknowns, e.g. `f1`, `g3`.
    pub unknowns: Vec<String>,
    pub coeffs: Coefficients,
    /// Maps the unknowns to `(f1..f4, g1..g4)`.
    pub lift: DMatrix<C64>,
}

const NAMES: [&str; 8] = ["f1", "f2", "f3", "f4", "g1", "g2", "g3", "g4"];

/// Per-row pattern of the four equations of one isotopic block:
/// (derivative and energy column, derivative sign, mass column, nu column).
const ROWS: [(usize, f64, usize, usize); 4] = [(2, -1.0, 0, 3), (3, 1.0, 1, 2), (0, 1.0, 2, 1), (1, -1.0, 3, 0)];

/// Coefficients of the eight equations with unknowns `(f1..f4, g1..g4)`.
fn full_coefficients(nu: f64, epsilon: f64, mass: f64) -> Coefficients {
    let mut c = Coefficients::zeros(8, 8);
    for b in 0..2 {
        let base = 4 * b;
        let t3 = if b == 0 { 1.0 } else { -1.0 };
        for (k, &(dcol, s, mcol, ncol)) in ROWS.iter().enumerate() {
            let row = base + k;
            c.d[(row, base + dcol)] = I * s;
            c.e_const[(row, base + dcol)] = re(epsilon);
            c.e_const[(row, base + mcol)] = re(-mass);
            c.e_f[(row, base + dcol)] = re(t3);
            c.e_phi[(row, base + mcol)] = re(-t3);
            c.e_inv[(row, base + ncol)] = I * (s * nu);
        }
    }
    // Isotopic mixing, coefficient of W / r.
    c.e_w[(1, 6)] = I * 2.0;
    c.e_w[(3, 4)] = I * -2.0;
    c.e_w[(4, 3)] = I * -2.0;
    c.e_w[(6, 1)] = I * 2.0;
    c
}

/// Unknowns and equations surviving at `j = 0`: `(f2, f4, g1, g3)`.
const J0_INDEX: [usize; 4] = [1, 3, 4, 6];

/// Builds the separated system for integer `j >= 0`.
pub fn build_system(j: HalfInt, profiles: &ProfileFunctions, epsilon: f64, mass: f64) -> Result<RadialSystem> {
    if !j.is_integer() || j < HalfInt::ZERO {
        return Err(IsoError::Criterion(format!(
            "the doublet multiplet admits only integer j >= 0, got j = {j}"
        )));
    }
    let n = nu(j);
    let full = full_coefficients(n, epsilon, mass);
    let (case_tag, coeffs, idx): (CaseTag, Coefficients, Vec<usize>) = if j == HalfInt::ZERO {
        (CaseTag::JZero, full.map(|m| m.select_rows(&J0_INDEX).select_columns(&J0_INDEX)), J0_INDEX.to_vec())
    } else {
        (CaseTag::GeneralJ, full, (0..8).collect())
    };
    let mut lift = DMatrix::zeros(8, idx.len());
    for (c, &k) in idx.iter().enumerate() {
        lift[(k, c)] = ONE;
    }
    Ok(RadialSystem {
        case_tag,
        j,
        nu: n,
        epsilon,
        mass,
        profiles: profiles.clone(),
        delta: None,
        a: None,
        mu: None,
        unknowns: idx.iter().map(|&k| NAMES[k].to_string()).collect(),
        coeffs,
        lift,
    })
}

/// Why a reduction is not consistent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncompatibilityKind {
    /// `F~` does not vanish where the reduced equations need it to.
    FTildeNonzero,
    /// `Phi~` does not vanish.
    PhiTildeNonzero,
    /// `W != 0` needs `e^{iA} = e^{-iA}`.
    ChiralParameter,
}

/// Structured description of an inconsistent reduction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncompatibilityReport {
    pub kinds: Vec<IncompatibilityKind>,
    /// Grid radii where an offending profile is nonzero.
    pub offending_points: Vec<f64>,
    pub message: String,
}

impl From<IncompatibilityReport> for IsoError {
    fn from(r: IncompatibilityReport) -> Self {
        IsoError::Incompatible(r.message)
    }
}

/// Result of a reduction attempt.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Reduction {
    Reduced(RadialSystem),
    Incompatible(IncompatibilityReport),
}

impl Reduction {
    /// The reduced system, or the report converted to an error.
    pub fn into_result(self) -> Result<RadialSystem> {
        match self {
            Reduction::Reduced(s) => Ok(s),
            Reduction::Incompatible(r) => Err(r.into()),
        }
    }
}

const STRUCT_TOL: f64 = 1e-12;

fn row_vec(m: &DMatrix<C64>, i: usize) -> Vec<C64> {
    m.row(i).iter().copied().collect()
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Mismatch of row `i` against `ratio` times row `p` for each coefficient matrix.
fn row_mismatch(c: &Coefficients, i: usize, p: usize, ratio: C64) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (k, m) in c.all().iter().enumerate() {
        let a = row_vec(m, i);
        let b = row_vec(m, p);
        let d: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x - ratio * y).collect();
        out[k] = max_norm(&d);
    }
    out
}

/// Substitutes `y = L z` and keeps one equation per proportional group.
///
/// Returns the reduced coefficients and, for each of the `E_f`, `E_phi` and
/// `E_w` parts, whether the dropped equations disagree with the kept ones.
fn substitute(c: &Coefficients, l: &DMatrix<C64>) -> Result<(Coefficients, [bool; 3])> {
    let sub = c.map(|m| m * l);
    let n = sub.d.nrows();
    let k = l.ncols();
    let mut kept: Vec<usize> = Vec::new();
    let mut conflicts = [false; 3];
    for i in 0..n {
        let di = row_vec(&sub.d, i);
        let zero_row = sub.all().iter().all(|m| max_norm(&row_vec(m, i)) < STRUCT_TOL);
        if zero_row {
            continue;
        }
        if max_norm(&di) < STRUCT_TOL {
            return Err(IsoError::Case(format!("equation {} has no derivative term after substitution", i + 1)));
        }
        // Find a kept row with a proportional derivative part.
        let mut partner = None;
        for &p in &kept {
            let dp = row_vec(&sub.d, p);
            let piv = (0..k).max_by(|&a, &b| dp[a].norm().total_cmp(&dp[b].norm())).unwrap_or(0);
            let ratio = di[piv] / dp[piv];
            let diff: Vec<C64> = di.iter().zip(&dp).map(|(x, y)| x - ratio * y).collect();
            if max_norm(&diff) < STRUCT_TOL {
                partner = Some((p, ratio));
                break;
            }
        }
        match partner {
            None => kept.push(i),
            Some((p, ratio)) => {
                let mm = row_mismatch(&sub, i, p, ratio);
                if mm[1] > STRUCT_TOL || mm[2] > STRUCT_TOL {
                    return Err(IsoError::Case(format!(
                        "equation {} contradicts equation {} independently of the profiles",
                        i + 1,
                        p + 1
                    )));
                }
                for q in 0..3 {
                    conflicts[q] |= mm[3 + q] > STRUCT_TOL;
                }
            }
        }
    }
    if kept.len() != k {
        return Err(IsoError::Case(format!("reduction kept {} equations for {k} unknowns", kept.len())));
    }
    Ok((sub.rows(&kept), conflicts))
}

fn vanishes_on(grid: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    grid.iter().copied().filter(|&r| f(r).abs() > 1e-14).collect()
}

/// Default radii used to decide whether a profile vanishes identically.
pub fn default_scan_grid() -> Vec<f64> {
    (1..=400).map(|i| 0.05 * i as f64).collect()
}

fn linkage_matrix(system: &RadialSystem, delta: i8, a: &ChiralParameter) -> Result<DMatrix<C64>> {
    let link = eigen_constraints(system.j, delta, a)?;
    let lm = link.matrix();
    Ok(match system.case_tag {
        CaseTag::GeneralJ => {
            let mut l = DMatrix::zeros(8, 4);
            for i in 0..4 {
                l[(i, i)] = ONE;
                for c in 0..4 {
                    l[(4 + i, c)] = lm[(i, c)];
                }
            }
            l
        }
        // Unknowns (f2, f4, g1, g3) -> (f2, f4) with g1 = c f4, g3 = c f2.
        CaseTag::JZero => {
            let c = lm[(0, 3)];
            let mut l = DMatrix::zeros(4, 2);
            l[(0, 0)] = ONE;
            l[(1, 1)] = ONE;
            l[(2, 1)] = c;
            l[(3, 0)] = c;
            l
        }
        other => return Err(IsoError::Case(format!("N reduction applies to the unreduced systems, got {other}"))),
    })
}

/// Imposes the `N_A` eigen-linkage and classifies the result.
///
/// `grid` is used to decide whether `F~`, `Phi~` and `W` vanish identically.
pub fn reduce_with_n(system: &RadialSystem, delta: i8, a: &ChiralParameter, grid: &[f64]) -> Result<Reduction> {
    let l = linkage_matrix(system, delta, a)?;
    let (coeffs, conflicts) = substitute(&system.coeffs, &l)?;
    let p = &system.profiles;
    let mut kinds = Vec::new();
    let mut points: Vec<f64> = Vec::new();
    if conflicts[0] {
        let bad = vanishes_on(grid, |r| p.f_tilde(r));
        if !bad.is_empty() {
            kinds.push(IncompatibilityKind::FTildeNonzero);
            points.extend(bad);
        }
    }
    if conflicts[1] {
        let bad = vanishes_on(grid, |r| p.phi_tilde(r));
        if !bad.is_empty() {
            kinds.push(IncompatibilityKind::PhiTildeNonzero);
            points.extend(bad);
        }
    }
    let w_bad = vanishes_on(grid, |r| p.w(r));
    if conflicts[2] && !w_bad.is_empty() {
        kinds.push(IncompatibilityKind::ChiralParameter);
        points.extend(w_bad.iter().copied());
    }
    if !kinds.is_empty() {
        points.sort_by(f64::total_cmp);
        points.dedup();
        let message = format!(
            "N-reduction with delta = {delta}, A = {a} is inconsistent: {}",
            kinds
                .iter()
                .map(|k| match k {
                    IncompatibilityKind::FTildeNonzero => "F~ is nonzero",
                    IncompatibilityKind::PhiTildeNonzero => "Phi~ is nonzero",
                    IncompatibilityKind::ChiralParameter => "W is nonzero and e^(iA) is not +-1",
                })
                .collect::<Vec<_>>()
                .join("; ")
        );
        return Ok(Reduction::Incompatible(IncompatibilityReport { kinds, offending_points: points, message }));
    }
    let w_zero = w_bad.is_empty();
    let case_tag = match (system.case_tag, w_zero) {
        (CaseTag::GeneralJ, true) => CaseTag::FreeReduced,
        (CaseTag::GeneralJ, false) => CaseTag::WNonzeroReduced,
        (_, true) => CaseTag::J0Free,
        (_, false) => CaseTag::J0W,
    };
    let unknowns = if system.case_tag == CaseTag::JZero {
        vec!["f2".to_string(), "f4".to_string()]
    } else {
        NAMES[..4].iter().map(|s| s.to_string()).collect()
    };
    Ok(Reduction::Reduced(RadialSystem {
        case_tag,
        unknowns,
        coeffs,
        lift: &system.lift * l,
        delta: Some(delta),
        a: Some(*a),
        ..system.clone()
    }))
}

/// Imposes `f4 = mu f1, f3 = mu f2` on the free-reduced system.
pub fn reduce_with_k(system: &RadialSystem, mu: i8) -> Result<RadialSystem> {
    if system.case_tag != CaseTag::FreeReduced {
        return Err(IsoError::Case(format!("K reduction needs the free-reduced system, got {}", system.case_tag)));
    }
    if mu != 1 && mu != -1 {
        return Err(IsoError::Domain(format!("mu must be +1 or -1, got {mu}")));
    }
    let m = re(f64::from(mu));
    let mut l = DMatrix::zeros(4, 2);
    l[(0, 0)] = ONE;
    l[(1, 1)] = ONE;
    l[(2, 1)] = m;
    l[(3, 0)] = m;
    let (coeffs, conflicts) = substitute(&system.coeffs, &l)?;
    let p = &system.profiles;
    let grid = default_scan_grid();
    let nonzero = [
        !vanishes_on(&grid, |r| p.f_tilde(r)).is_empty(),
        !vanishes_on(&grid, |r| p.phi_tilde(r)).is_empty(),
        !vanishes_on(&grid, |r| p.w(r)).is_empty(),
    ];
    if conflicts.iter().zip(&nonzero).any(|(&c, &n)| c && n) {
        return Err(IsoError::Case("K linkage is inconsistent with the profile terms".into()));
    }
    Ok(RadialSystem {
        case_tag: CaseTag::KReduced,
        unknowns: vec!["f1".into(), "f2".into()],
        coeffs,
        lift: &system.lift * l,
        mu: Some(mu),
        ..system.clone()
    })
}

impl RadialSystem {
    /// Number of unknowns.
    pub fn size(&self) -> usize {
        self.coeffs.d.ncols()
    }

    /// `E(r)` at a radius.
    pub fn e_at(&self, r: f64) -> DMatrix<C64> {
        let p = &self.profiles;
        self.coeffs.e_at(r, p.w(r), p.f_tilde(r), p.phi_tilde(r))
    }

    fn d_inverse(&self) -> Result<DMatrix<C64>> {
        if self.coeffs.d.nrows() != self.coeffs.d.ncols() {
            return Err(IsoError::Case("system is not square".into()));
        }
        self.coeffs
            .d
            .clone()
            .try_inverse()
            .ok_or_else(|| IsoError::Case("derivative matrix is singular".into()))
    }

    /// `A(r)` in `y' = A(r) y`.
    pub fn generator(&self, r: f64) -> Result<DMatrix<C64>> {
        Ok(-self.d_inverse()? * self.e_at(r))
    }

    /// Constant part `B` and `1/r` part `C` of the generator, with `W` frozen at `w`.
    pub fn split_generator(&self, w: f64) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
        let dinv = -self.d_inverse()?;
        let b = &dinv * &self.coeffs.e_const;
        let c = &dinv * (&self.coeffs.e_inv + &self.coeffs.e_w * re(w));
        Ok((b, c))
    }

    /// `max |D y' + E(r) y|` for a state and derivative at `r`.
    pub fn residual_at(&self, r: f64, y: &DVector<C64>, dy: &DVector<C64>) -> f64 {
        let res = &self.coeffs.d * dy + self.e_at(r) * y;
        res.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Boundary data for [`solve`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    RegularAtOrigin,
    Incoming,
    Outgoing,
}

impl std::str::FromStr for Boundary {
    type Err = IsoError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regular" | "regular_at_origin" => Ok(Boundary::RegularAtOrigin),
            "incoming" => Ok(Boundary::Incoming),
            "outgoing" => Ok(Boundary::Outgoing),
            _ => Err(IsoError::Parse(format!("unknown boundary '{s}' (regular, incoming, outgoing)"))),
        }
    }
}

/// Numerical solution of a radial system on a grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialSolution {
    pub case_tag: CaseTag,
    pub j: HalfInt,
    pub epsilon: f64,
    pub mass: f64,
    pub boundary: Boundary,
    pub unknowns: Vec<String>,
    pub grid: Vec<f64>,
    /// `values[k][i]` is unknown `k` at `grid[i]`.
    pub values: Vec<Vec<C64>>,
    /// Largest one-step defect relative to the solution scale.
    pub residual_norm: f64,
}

impl RadialSolution {
    /// The state at grid index `i`.
    pub fn state(&self, i: usize) -> DVector<C64> {
        DVector::from_iterator(self.values.len(), self.values.iter().map(|v| v[i]))
    }
}

/// Solver tolerance used by [`solve`].
pub const SOLVER_TOL: f64 = 1e-10;

/// Default inner radius `1e-3 / max(epsilon, m)`.
pub fn default_r_min(epsilon: f64, mass: f64) -> f64 {
    1e-3 / epsilon.abs().max(mass.abs()).max(1e-300)
}

fn eigen_sorted(m: &DMatrix<C64>) -> Vec<C64> {
    let mut ev: Vec<C64> = m.clone().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_else(|| {
        nalgebra::Schur::new(m.clone()).eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default()
    });
    ev.sort_by(|a, b| b.re.total_cmp(&a.re));
    ev
}

fn null_vector(m: &DMatrix<C64>) -> DVector<C64> {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    vt.row(idx).adjoint().into_owned()
}

/// Frobenius series `r^rho sum a_n r^n` of the regular solution at `r0`.
fn frobenius_start(system: &RadialSystem, r0: f64) -> Result<State> {
    let (b, c) = system.split_generator(system.profiles.w(r0))?;
    let n = system.size();
    let rho = *eigen_sorted(&c).first().ok_or_else(|| IsoError::Integration("no indicial root".into()))?;
    let a0 = null_vector(&(&c - DMatrix::identity(n, n) * rho));
    let mut term = a0.clone();
    let mut sum = a0.clone();
    let mut rn = 1.0;
    for k in 1..200 {
        let lhs = DMatrix::identity(n, n) * (rho + re(k as f64)) - &c;
        let rhs = &b * &term;
        term = lhs.lu().solve(&rhs).ok_or_else(|| IsoError::Integration("resonant Frobenius recursion".into()))?;
        rn *= r0;
        let t = &term * re(rn);
        sum += &t;
        if t.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    Ok(sum * C64::new(r0, 0.0).powc(rho))
}

/// Asymptotic series `e^{lambda r} r^rho sum a_n r^{-n}` at `r` for a
/// two-component system, in the eigen-channel selected by `outgoing`.
fn asymptotic_start(system: &RadialSystem, r: f64, outgoing: bool) -> Result<State> {
    if system.size() != 2 {
        return Err(IsoError::Case("scattering boundaries are available for two-component systems".into()));
    }
    let (b, c) = system.split_generator(system.profiles.w(r))?;
    let eig = b.clone().eigenvalues().ok_or_else(|| IsoError::Integration("no eigenvalues".into()))?;
    let (l1, l2) = if (eig[0].im > eig[1].im) == outgoing { (eig[0], eig[1]) } else { (eig[1], eig[0]) };
    if (l1 - l2).im.abs() < 1e-12 || l1.re.abs() > 1e-12 * l1.norm().max(1.0) {
        return Err(IsoError::Domain("no propagating channel: need epsilon^2 > m^2".into()));
    }
    let v1 = null_vector(&(&b - DMatrix::identity(2, 2) * l1));
    let v2 = null_vector(&(&b - DMatrix::identity(2, 2) * l2));
    let p = DMatrix::from_columns(&[v1, v2]);
    let pinv = p.clone().try_inverse().ok_or_else(|| IsoError::Integration("defective generator".into()))?;
    let cp = &pinv * &c * &p;
    let rho = cp[(0, 0)];
    let (mut a1, mut a2) = (ONE, ZERO);
    let (mut s1, mut s2) = (ONE, ZERO);
    let mut best = f64::INFINITY;
    for n in 0..60 {
        let nf = n as f64;
        let next2 = (cp[(1, 0)] * a1 + (cp[(1, 1)] - rho + nf) * a2) / (l1 - l2);
        let next1 = -cp[(0, 1)] * next2 / (nf + 1.0);
        let scale = r.powi(-(n + 1));
        let size = next1.norm().max(next2.norm()) * scale;
        if size >= best || size < 1e-18 {
            break;
        }
        best = size;
        a1 = next1;
        a2 = next2;
        s1 += a1 * scale;
        s2 += a2 * scale;
    }
    let pref = (l1 * r).exp() * C64::new(r, 0.0).powc(rho);
    let z = DVector::from_vec(vec![s1 * pref, s2 * pref]);
    Ok(p * z)
}

/// Integrates a square system on `grid` (increasing, positive radii).
pub fn solve(system: &RadialSystem, boundary: Boundary, grid: &[f64]) -> Result<RadialSolution> {
    if grid.is_empty() || grid[0] <= 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(IsoError::Domain("grid must be increasing with r_min > 0".into()));
    }
    let gen = |r: f64| system.generator(r);
    gen(grid[0])?;
    let f = |r: f64, y: &State| system.generator(r).expect("checked generator") * y;
    let tol = Tolerance { rtol: 1e-12, atol: 1e-300, min_step: 1e-14 };
    let states: Vec<State> = match boundary {
        Boundary::RegularAtOrigin => {
            let r0 = grid[0].min(default_r_min(system.epsilon, system.mass));
            let y0 = frobenius_start(system, r0)?;
            integrate_to_points(&f, r0, &y0, grid, &tol)?
        }
        Boundary::Incoming | Boundary::Outgoing => {
            let (b, _) = system.split_generator(0.0)?;
            let k = b.clone().eigenvalues().map(|e| e[0].norm()).unwrap_or(1.0).max(1e-6);
            let big = grid[grid.len() - 1].max(40.0 / k);
            let y0 = asymptotic_start(system, big, boundary == Boundary::Outgoing)?;
            let rev: Vec<f64> = grid.iter().rev().copied().collect();
            let mut out = integrate_to_points(&f, big, &y0, &rev, &tol)?;
            out.reverse();
            out
        }
    };
    let n = system.size();
    let values: Vec<Vec<C64>> = (0..n).map(|k| states.iter().map(|s| s[k]).collect()).collect();
    let residual_norm = one_step_defect(system, grid, &states);
    Ok(RadialSolution {
        case_tag: system.case_tag,
        j: system.j,
        epsilon: system.epsilon,
        mass: system.mass,
        boundary,
        unknowns: system.unknowns.clone(),
        grid: grid.to_vec(),
        values,
        residual_norm,
    })
}

/// Largest defect `|RK4(y_i -> r_{i+1}) - y_{i+1}|` relative to the larger of
/// the two states, propagating each interval independently.
pub fn one_step_defect(system: &RadialSystem, grid: &[f64], states: &[State]) -> f64 {
    let f = |r: f64, y: &State| system.generator(r).expect("checked generator") * y;
    let mut worst = 0.0f64;
    for i in 0..grid.len().saturating_sub(1) {
        let h = grid[i + 1] - grid[i];
        let local = system.generator(grid[i]).map(|g| g.norm()).unwrap_or(1.0);
        let substeps = ((h * local * 40.0).ceil() as usize).clamp(8, 4000);
        let y = rk4(&f, grid[i], grid[i + 1], &states[i], substeps);
        let scale = states[i].norm().max(states[i + 1].norm()).max(1e-300);
        worst = worst.max((y - &states[i + 1]).norm() / scale);
    }
    worst
}

/// Lifts a solution to the eight amplitudes `(f1..f4, g1..g4)` with their
/// radial derivatives obtained from the system itself.
pub fn lift(system: &RadialSystem, sol: &RadialSolution) -> Result<Vec<([C64; 8], [C64; 8])>> {
    let mut out = Vec::with_capacity(sol.grid.len());
    for (i, &r) in sol.grid.iter().enumerate() {
        let y = sol.state(i);
        let dy = system.generator(r)? * &y;
        let (ly, ldy) = (&system.lift * y, &system.lift * dy);
        let mut a = [ZERO; 8];
        let mut b = [ZERO; 8];
        for k in 0..8 {
            a[k] = ly[k];
            b[k] = ldy[k];
        }
        out.push((a, b));
    }
    Ok(out)
}

/// Largest residual of the lifted solution in the eight-equation system,
/// relative to the largest lifted amplitude.
pub fn parent_residual(system: &RadialSystem, sol: &RadialSolution) -> Result<f64> {
    let full = full_coefficients(system.nu, system.epsilon, system.mass);
    let p = &system.profiles;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (i, (y, dy)) in lift(system, sol)?.into_iter().enumerate() {
        let r = sol.grid[i];
        let yv = DVector::from_row_slice(&y);
        let dv = DVector::from_row_slice(&dy);
        let res = &full.d * dv + full.e_at(r, p.w(r), p.f_tilde(r), p.phi_tilde(r)) * &yv;
        worst = worst.max(res.iter().map(|z| z.norm()).fold(0.0, f64::max));
        scale = scale.max(yv.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    Ok(worst / scale.max(1e-300))
}

/// Classification of one `A` sample for a set of profiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Admissibility {
    /// `W = 0`, `F~ = Phi~ = 0`: every complex `A` works.
    AdmissibleAnyA,
    /// `W != 0`: only `e^{iA} = +-1` works.
    AdmissibleOnlyRealDelta,
    /// `F~` or `Phi~` is nonzero.
    Inadmissible,
}

/// One row of a compatibility scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityEntry {
    pub a: ChiralParameter,
    pub class: Admissibility,
    /// Whether this particular `A` gives a consistent reduction.
    pub admissible: bool,
}

/// Classifies each `A` sample for the given profiles.
pub fn compatibility_scan(profiles: &ProfileFunctions, a_samples: &[ChiralParameter], grid: &[f64]) -> Vec<CompatibilityEntry> {
    let ft = !vanishes_on(grid, |r| profiles.f_tilde(r)).is_empty();
    let pt = !vanishes_on(grid, |r| profiles.phi_tilde(r)).is_empty();
    let w = !vanishes_on(grid, |r| profiles.w(r)).is_empty();
    let class = if ft || pt {
        Admissibility::Inadmissible
    } else if w {
        Admissibility::AdmissibleOnlyRealDelta
    } else {
        Admissibility::AdmissibleAnyA
    };
    a_samples
        .iter()
        .map(|a| {
            let d2 = a.delta() * a.delta();
            let admissible = match class {
                Admissibility::Inadmissible => false,
                Admissibility::AdmissibleAnyA => true,
                Admissibility::AdmissibleOnlyRealDelta => (d2 - ONE).norm() < 1e-12,
            };
            CompatibilityEntry { a: *a, class, admissible }
        })
        .collect()
}

/// Which Bessel-type solution to use in a closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BesselKind {
    J,
    Y,
    Hankel1,
    Hankel2,
}

fn bessel_kind(kind: BesselKind, order: f64, x: f64) -> Result<C64> {
    Ok(match kind {
        BesselKind::J => re(bessel_jy(order, x)?.j),
        BesselKind::Y => re(bessel_jy(order, x)?.y),
        BesselKind::Hankel1 => hankel1(order, x)?,
        BesselKind::Hankel2 => hankel2(order, x)?,
    })
}

/// Closed-form `(f1, f2)` of the `K`-reduced pair:
/// `f1 - f2 = sqrt(kr) Z_{nu-1/2}(kr)` and
/// `f1 + f2 = i (epsilon + mu m)/k sqrt(kr) Z_{nu+1/2}(kr)`, `k^2 = epsilon^2 - m^2`.
pub fn closed_form_k_reduced(j: HalfInt, mu: i8, epsilon: f64, mass: f64, kind: BesselKind, r: f64) -> Result<[C64; 2]> {
    let k2 = epsilon * epsilon - mass * mass;
    if k2 <= 0.0 {
        return Err(IsoError::Domain("closed form needs epsilon^2 > m^2".into()));
    }
    if j < HalfInt::ONE {
        return Err(IsoError::Domain("the K-reduced pair exists for j >= 1".into()));
    }
    let k = k2.sqrt();
    let n = nu(j);
    let x = k * r;
    let v = bessel_kind(kind, n - 0.5, x)? * x.sqrt();
    let u = bessel_kind(kind, n + 0.5, x)? * x.sqrt() * (I * (epsilon + f64::from(mu) * mass) / k);
    Ok([(u + v) * 0.5, (u - v) * 0.5])
}

/// Closed-form `(f2, f4)` of the free `j = 0` pair: `f4 = e^{+-ikr}`,
/// `f2 = (epsilon -+ k)/m e^{+-ikr}` (upper sign outgoing).
pub fn closed_form_j0_free(epsilon: f64, mass: f64, outgoing: bool, r: f64) -> Result<[C64; 2]> {
    let k2 = epsilon * epsilon - mass * mass;
    if k2 <= 0.0 || mass == 0.0 {
        return Err(IsoError::Domain("closed form needs epsilon^2 > m^2 and m != 0".into()));
    }
    let k = if outgoing { k2.sqrt() } else { -k2.sqrt() };
    let e = (I * k * r).exp();
    Ok([e * ((epsilon - k) / mass), e])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{dirac_section, LocalCoefficients};
    use crate::quadrature::uniform_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coefficients_match_angular_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = ProfileFunctions::constant(0.3, 0.7, -0.2, 1.3, 0.9);
        for j in [0, 1, 2] {
            let j = HalfInt::int(j);
            let sys = build_system(j, &p, 1.7, 0.6).unwrap();
            let full = full_coefficients(nu(j), 1.7, 0.6);
            let r = 0.8;
            let mut y = [ZERO; 8];
            let mut dy = [ZERO; 8];
            for k in 0..8 {
                y[k] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                dy[k] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
            if j == HalfInt::ZERO {
                for k in [0, 2, 5, 7] {
                    y[k] = ZERO;
                    dy[k] = ZERO;
                }
            }
            let c = LocalCoefficients::from_profiles(&p, r, 1.7, 0.6);
            let (f, g) = dirac_section(j, HalfInt::ZERO, &y, &dy, &c).unwrap().ansatz_coefficients(j, HalfInt::ZERO).unwrap();
            let res = &full.d * DVector::from_row_slice(&dy)
                + full.e_at(r, p.w(r), p.f_tilde(r), p.phi_tilde(r)) * DVector::from_row_slice(&y);
            for k in 0..4 {
                assert!((res[k] - f[k]).norm() < 1e-12);
                assert!((res[4 + k] - g[k]).norm() < 1e-12);
            }
            assert_eq!(sys.size(), if j == HalfInt::ZERO { 4 } else { 8 });
        }
        assert!(build_system(HalfInt::HALF, &p, 1.0, 1.0).is_err());
    }

    #[test]
    fn reductions_classify() {
        let grid = default_scan_grid();
        let mono = ProfileFunctions::simplest_monopole(1.0);
        let free = ProfileFunctions::free(1.0);
        let j1 = HalfInt::ONE;
        let a_i = ChiralParameter::from_parts(0.0, 1.0).unwrap();
        let s = build_system(j1, &mono, 2.0, 1.0).unwrap();
        let r = reduce_with_n(&s, 1, &a_i, &grid).unwrap().into_result().unwrap();
        assert_eq!(r.case_tag, CaseTag::FreeReduced);
        let s = build_system(j1, &free, 2.0, 1.0).unwrap();
        let r = reduce_with_n(&s, 1, &ChiralParameter::zero(), &grid).unwrap().into_result().unwrap();
        assert_eq!(r.case_tag, CaseTag::WNonzeroReduced);
        match reduce_with_n(&s, 1, &a_i, &grid).unwrap() {
            Reduction::Incompatible(rep) => assert_eq!(rep.kinds, vec![IncompatibilityKind::ChiralParameter]),
            Reduction::Reduced(_) => panic!("expected incompatibility"),
        }
        let fp = ProfileFunctions::new("f", |_| 0.0, |_| 1.0, |r| -1.0 / (r * r), 1.0, 0.0);
        let s = build_system(j1, &fp, 2.0, 1.0).unwrap();
        match reduce_with_n(&s, -1, &ChiralParameter::zero(), &grid).unwrap() {
            Reduction::Incompatible(rep) => {
                assert_eq!(rep.kinds, vec![IncompatibilityKind::FTildeNonzero]);
                assert_eq!(rep.offending_points.len(), grid.len());
            }
            Reduction::Reduced(_) => panic!("expected incompatibility"),
        }
        let s0 = build_system(HalfInt::ZERO, &free, 2.0, 1.0).unwrap();
        let r0 = reduce_with_n(&s0, 1, &ChiralParameter::real(std::f64::consts::PI).unwrap(), &grid).unwrap();
        assert_eq!(r0.into_result().unwrap().case_tag, CaseTag::J0W);
        let s0 = build_system(HalfInt::ZERO, &mono, 2.0, 1.0).unwrap();
        let r0 = reduce_with_n(&s0, -1, &a_i, &grid).unwrap().into_result().unwrap();
        assert_eq!(r0.case_tag, CaseTag::J0Free);
        assert!(reduce_with_k(&r0, 1).is_err());
    }

    #[test]
    fn k_reduced_printed_pattern() {
        let mono = ProfileFunctions::simplest_monopole(1.0);
        let (eps, m) = (2.0, 1.0);
        let s = build_system(HalfInt::ONE, &mono, eps, m).unwrap();
        let r = reduce_with_n(&s, 1, &ChiralParameter::zero(), &default_scan_grid()).unwrap().into_result().unwrap();
        for mu in [1i8, -1] {
            let k = reduce_with_k(&r, mu).unwrap();
            let n = 2f64.sqrt();
            let dinv_e = k.coeffs.d.clone().try_inverse().unwrap() * k.e_at(1.0);
            // Equation for f1: i f1' + eps f1 + (i nu/r - mu m) f2 = 0.
            let row: Vec<C64> = dinv_e.row(0).iter().copied().collect();
            let expect0 = [eps / I, (I * n - f64::from(mu) * m) / I];
            assert!((row[0] - expect0[0]).norm() < 1e-14 && (row[1] - expect0[1]).norm() < 1e-14);
        }
    }

    #[test]
    fn k_reduced_matches_bessel() {
        let mono = ProfileFunctions::simplest_monopole(1.0);
        let (eps, m) = (2.0, 1.0);
        let grid = uniform_grid(0.5, 12.0, 60);
        for j in [1, 2] {
            let j = HalfInt::int(j);
            let s = build_system(j, &mono, eps, m).unwrap();
            let r = reduce_with_n(&s, -1, &ChiralParameter::zero(), &default_scan_grid()).unwrap().into_result().unwrap();
            for mu in [1i8, -1] {
                let k = reduce_with_k(&r, mu).unwrap();
                for (b, kind) in [
                    (Boundary::RegularAtOrigin, BesselKind::J),
                    (Boundary::Outgoing, BesselKind::Hankel1),
                    (Boundary::Incoming, BesselKind::Hankel2),
                ] {
                    let sol = solve(&k, b, &grid).unwrap();
                    assert!(sol.residual_norm < 1e-9, "{b:?} residual {}", sol.residual_norm);
                    let c0 = closed_form_k_reduced(j, mu, eps, m, kind, grid[0]).unwrap();
                    let scale = c0[0] / sol.values[0][0];
                    let mut worst = 0.0f64;
                    let mut size = 0.0f64;
                    for (i, &rr) in grid.iter().enumerate() {
                        let c = closed_form_k_reduced(j, mu, eps, m, kind, rr).unwrap();
                        for q in 0..2 {
                            worst = worst.max((sol.values[q][i] * scale - c[q]).norm());
                            size = size.max(c[q].norm());
                        }
                    }
                    assert!(worst / size < 1e-8, "j={j} mu={mu} {b:?}: {}", worst / size);
                    assert!(parent_residual(&k, &sol).unwrap() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn j0_free_plane_waves() {
        let mono = ProfileFunctions::simplest_monopole(1.0);
        let (eps, m) = (2.0, 1.0);
        let s = build_system(HalfInt::ZERO, &mono, eps, m).unwrap();
        let r = reduce_with_n(&s, 1, &ChiralParameter::from_parts(0.3, 0.5).unwrap(), &default_scan_grid())
            .unwrap()
            .into_result()
            .unwrap();
        let grid = uniform_grid(0.1, 10.0, 50);
        let sol = solve(&r, Boundary::Outgoing, &grid).unwrap();
        let c0 = closed_form_j0_free(eps, m, true, grid[0]).unwrap();
        let scale = c0[1] / sol.values[1][0];
        for (i, &rr) in grid.iter().enumerate() {
            let c = closed_form_j0_free(eps, m, true, rr).unwrap();
            for q in 0..2 {
                assert!((sol.values[q][i] * scale - c[q]).norm() < 1e-8);
            }
        }
        assert!(sol.residual_norm < 1e-8);
        assert!(parent_residual(&r, &sol).unwrap() < 1e-9);
    }

    #[test]
    fn j0_w_system_regular_solution() {
        let free = ProfileFunctions::free(1.0);
        let s = build_system(HalfInt::ZERO, &free, 2.0, 1.0).unwrap();
        let r = reduce_with_n(&s, 1, &ChiralParameter::zero(), &default_scan_grid()).unwrap().into_result().unwrap();
        assert_eq!(r.case_tag, CaseTag::J0W);
        // The W/r coupling is present in the reduced generator.
        assert!(r.coeffs.e_w.iter().any(|z| z.norm() > 0.5));
        let grid = uniform_grid(0.01, 8.0, 80);
        let sol = solve(&r, Boundary::RegularAtOrigin, &grid).unwrap();
        assert!(sol.residual_norm < 1e-10);
        assert!(parent_residual(&r, &sol).unwrap() < 1e-9);
        // Regular s-wave of the free doublet vanishes linearly at the origin.
        let ratio = sol.state(1).norm() / sol.state(0).norm();
        assert!((ratio - grid[1] / grid[0]).abs() / (grid[1] / grid[0]) < 1e-3);
    }

    #[test]
    fn free_and_monopole_differ_only_in_w() {
        let a = build_system(HalfInt::int(2), &ProfileFunctions::free(1.0), 1.5, 0.5).unwrap();
        let b = build_system(HalfInt::int(2), &ProfileFunctions::simplest_monopole(1.0), 1.5, 0.5).unwrap();
        assert_eq!(a.coeffs, b.coeffs);
        assert!((a.profiles.w(0.7) - 0.5).abs() < 1e-15 && b.profiles.w(0.7).abs() < 1e-15);
    }

    #[test]
    fn compatibility_classes() {
        let grid = default_scan_grid();
        let samples = [ChiralParameter::zero(), ChiralParameter::from_parts(0.0, 1.0).unwrap()];
        let f1 = ProfileFunctions::new("F=1", |_| 0.0, |_| 1.0, |r| -1.0 / (r * r), 1.0, 0.0);
        assert!(compatibility_scan(&f1, &samples, &grid).iter().all(|e| e.class == Admissibility::Inadmissible));
        let kap = ProfileFunctions::new("kappa", |_| 1.0, |_| 0.0, |r| -1.0 / (r * r), 1.0, 0.5);
        assert!(compatibility_scan(&kap, &samples, &grid).iter().all(|e| !e.admissible));
        let mono = ProfileFunctions::simplest_monopole(1.0);
        assert!(compatibility_scan(&mono, &samples, &grid).iter().all(|e| e.admissible));
        let free = ProfileFunctions::free(1.0);
        let v = compatibility_scan(&free, &samples, &grid);
        assert!(v[0].admissible && !v[1].admissible);
    }
}
