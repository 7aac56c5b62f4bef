//! Deterministic JSON and CSV exports of tables, potentials, radial
//! solutions, selection-rule tables and expectation values.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::discrete::{expectation_case, expectation_n, ChiralParameter, ExpectationCase};
use crate::error::{IsoError, Result};
use crate::gauge::{Gauge, Tetrad, PotentialSet, PotentialValue, ProfileFunctions};
use crate::halfint::HalfInt;
use crate::radial::{
    build_system, closed_form_j0_free, closed_form_k_reduced, default_scan_grid, parent_residual, reduce_with_k,
    reduce_with_n, solve, BesselKind, SOLVER_TOL, Boundary, CaseTag, IncompatibilityReport, RadialSystem, Reduction,
};
use crate::selection::{Selection, SweepRow, TruthRow};
use crate::verify::{expectation_case_formula, max_diff, sample_angles};
use crate::wavefunctions::{
    cartesian_doublet_sigma, decompose_cartesian, factorize, monopole_doublet, sigma_at_zero_a, to_gauge, to_tetrad,
    CartesianDecomposition, SigmaDecomposition,
};
use crate::wigner::{boundary_value, printed_tables, BoundaryValue, Endpoint, PrintedCell, WignerIndex};
use crate::C64;

/// Output format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = IsoError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(IsoError::Parse(format!("unknown format '{s}' (json, csv)"))),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn csv_string(write: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    write(&mut w)?;
    let bytes = w.into_inner().map_err(|e| IsoError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| IsoError::Io(e.to_string()))
}

/// The serialized name of a unit enum variant.
fn tag<T: Serialize>(t: &T) -> Result<String> {
    Ok(serde_json::to_value(t)?.as_str().unwrap_or_default().to_string())
}

/// Shortest round-trip text of a float, so that outputs are byte-stable.
fn num(x: f64) -> String {
    format!("{x:?}")
}

// ---------------------------------------------------------------- tables

/// One boundary-table cell, printed or computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub table: String,
    pub mprime: HalfInt,
    pub j: HalfInt,
    pub m: HalfInt,
    /// `"0"` or `"pi"`.
    pub theta: String,
    /// Printed entry, absent for extension rows.
    pub printed: Option<String>,
    /// Entry computed from the rotation functions.
    pub computed: String,
    /// Sign of a nonzero computed entry.
    pub sign: i8,
    /// Winding of a nonzero computed entry.
    pub winding: Option<HalfInt>,
    /// Whether the computed winding and support match the printed cell.
    pub matches_printed: Option<bool>,
}

fn cell_text(sign: i8, w: HalfInt) -> String {
    let s = if sign < 0 { "-" } else { "" };
    if w == HalfInt::ZERO {
        format!("{s}1")
    } else {
        format!("{s}exp(i*{w}*phi)")
    }
}

fn table_name(mp2: i64) -> String {
    let n = mp2.abs();
    format!("{}{}", n, if mp2 > 0 { "a" } else { "b" })
}

/// The printed tables, extended to every `j <= j_max` of each column when given.
pub fn table_cells(j_max: Option<HalfInt>) -> Result<Vec<TableCell>> {
    let printed = printed_tables();
    let mut cells = Vec::new();
    for mp2 in [1i64, -1, 2, -2, 3, -3] {
        let mut js: Vec<i64> = printed.iter().filter(|r| r.mprime.twice_value == mp2).map(|r| r.j.twice_value).collect();
        js.dedup();
        if let Some(jm) = j_max {
            let mut j2 = mp2.abs();
            while j2 <= jm.twice_value {
                if !js.contains(&j2) {
                    js.push(j2);
                }
                j2 += 2;
            }
        }
        js.sort();
        for j2 in js {
            for m2 in (-j2..=j2).step_by(2) {
                let row = printed.iter().find(|r| r.mprime.twice_value == mp2 && r.j.twice_value == j2 && r.m.twice_value == m2);
                let idx = WignerIndex::from_twice(j2, m2, mp2)?;
                for (ep, label) in [(Endpoint::ThetaZero, "0"), (Endpoint::ThetaPi, "pi")] {
                    let bv = boundary_value(&idx, ep)?;
                    let (computed, sign, winding) = match bv {
                        BoundaryValue::Zero => ("0".to_string(), 0, None),
                        BoundaryValue::Phase { sign, winding } => (cell_text(sign, winding), sign, Some(winding)),
                    };
                    let p = row.map(|r| if ep == Endpoint::ThetaZero { r.at_zero } else { r.at_pi });
                    let printed_text = p.map(|c| match c {
                        PrintedCell::Zero => "0".to_string(),
                        PrintedCell::Phase(w) => cell_text(1, w),
                    });
                    let matches = p.map(|c| match (c, bv) {
                        (PrintedCell::Zero, BoundaryValue::Zero) => true,
                        (PrintedCell::Phase(w), BoundaryValue::Phase { winding, .. }) => w == winding,
                        _ => false,
                    });
                    cells.push(TableCell {
                        table: table_name(mp2),
                        mprime: HalfInt::from_twice(mp2),
                        j: HalfInt::from_twice(j2),
                        m: HalfInt::from_twice(m2),
                        theta: label.to_string(),
                        printed: printed_text,
                        computed,
                        sign,
                        winding,
                        matches_printed: matches,
                    });
                }
            }
        }
    }
    Ok(cells)
}

/// Table cells as CSV.
pub fn tables_csv(cells: &[TableCell]) -> Result<String> {
    csv_string(|w| {
        w.write_record(["table", "mprime", "j", "m", "theta", "printed", "computed", "sign", "winding", "matches_printed"])?;
        for c in cells {
            w.write_record([
                c.table.clone(),
                c.mprime.to_string(),
                c.j.to_string(),
                c.m.to_string(),
                c.theta.clone(),
                c.printed.clone().unwrap_or_default(),
                c.computed.clone(),
                c.sign.to_string(),
                c.winding.map(|w| w.to_string()).unwrap_or_default(),
                c.matches_printed.map(|b| b.to_string()).unwrap_or_default(),
            ])?;
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- potentials

/// One sample of the potentials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSample {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
    #[serde(flatten)]
    pub value: PotentialValue,
}

/// The potentials of one gauge sampled on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialExport {
    pub gauge: Gauge,
    pub profiles: String,
    pub e: f64,
    pub kappa: f64,
    /// Gauge transformations applied to the Cartesian ansatz.
    pub chain: Vec<String>,
    pub samples: Vec<PotentialSample>,
}

/// Samples a potential set on `radii` x an interior `n_theta x n_theta` angular grid.
pub fn potential_export(set: &PotentialSet, radii: &[f64], n_theta: usize) -> Result<PotentialExport> {
    let mut samples = Vec::new();
    for &r in radii {
        for (theta, phi) in crate::verify::gauge_grid(n_theta) {
            samples.push(PotentialSample { r, theta, phi, value: set.eval(r, theta, phi)? });
        }
    }
    Ok(PotentialExport {
        gauge: set.gauge,
        profiles: set.profiles.label.clone(),
        e: set.profiles.e,
        kappa: set.profiles.kappa,
        chain: set.chain.iter().map(|c| format!("{c:?}")).collect(),
        samples,
    })
}

// ---------------------------------------------------------------- radial

/// Named profile families available from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// `K = -1/(e r^2)`, `F = Phi = 0`.
    Monopole,
    /// All profiles zero.
    Free,
}

impl FromStr for ProfileKind {
    type Err = IsoError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monopole" => Ok(ProfileKind::Monopole),
            "free" => Ok(ProfileKind::Free),
            _ => Err(IsoError::Parse(format!("unknown profile '{s}' (monopole, free)"))),
        }
    }
}

impl ProfileKind {
    /// The profile functions with coupling `e = 1`.
    pub fn profiles(self) -> ProfileFunctions {
        match self {
            ProfileKind::Monopole => ProfileFunctions::simplest_monopole(1.0),
            ProfileKind::Free => ProfileFunctions::free(1.0),
        }
    }
}

/// Parameters of a radial solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialRequest {
    pub j: HalfInt,
    pub delta: i8,
    /// `K` label; applied when the reduced system admits it.
    pub mu: Option<i8>,
    pub a: ChiralParameter,
    pub epsilon: f64,
    pub mass: f64,
    pub profile: ProfileKind,
    pub boundary: Boundary,
    pub grid: Vec<f64>,
}

/// A radial solution with its metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialExport {
    pub case_tag: CaseTag,
    pub j: HalfInt,
    pub delta: i8,
    pub mu: Option<i8>,
    pub a: ChiralParameter,
    pub epsilon: f64,
    pub mass: f64,
    pub profile: ProfileKind,
    pub boundary: Boundary,
    /// Largest one-step integration defect.
    pub residual_norm: f64,
    /// Residual of the lifted solution in the eight-equation system.
    pub parent_residual: f64,
    /// Relative deviation from the closed form, where one exists.
    pub closed_form_deviation: Option<f64>,
    pub unknowns: Vec<String>,
    pub grid: Vec<f64>,
    /// `values[k][i]` is unknown `k` at `grid[i]`.
    pub values: Vec<Vec<C64>>,
}

/// The reduced system for a request, or the structured incompatibility report.
pub fn reduced_system(req: &RadialRequest) -> Result<std::result::Result<RadialSystem, IncompatibilityReport>> {
    let s = build_system(req.j, &req.profile.profiles(), req.epsilon, req.mass)?;
    let r = match reduce_with_n(&s, req.delta, &req.a, &default_scan_grid())? {
        Reduction::Reduced(r) => r,
        Reduction::Incompatible(rep) => return Ok(Err(rep)),
    };
    Ok(Ok(match (r.case_tag, req.mu) {
        (CaseTag::FreeReduced, Some(mu)) => reduce_with_k(&r, mu)?,
        _ => r,
    }))
}

/// Two independent closed-form solutions of a two-component system, if known.
fn closed_form_basis(sys: &RadialSystem, r: f64) -> Option<Result<[[C64; 2]; 2]>> {
    let (e, m) = (sys.epsilon, sys.mass);
    match sys.case_tag {
        CaseTag::KReduced => {
            let mu = sys.mu?;
            Some((|| {
                Ok([
                    closed_form_k_reduced(sys.j, mu, e, m, BesselKind::J, r)?,
                    closed_form_k_reduced(sys.j, mu, e, m, BesselKind::Y, r)?,
                ])
            })())
        }
        CaseTag::J0Free => Some((|| Ok([closed_form_j0_free(e, m, true, r)?, closed_form_j0_free(e, m, false, r)?]))()),
        _ => None,
    }
}

/// Fits the closed-form basis to the solution at the first node and returns
/// the largest relative deviation over the grid.
fn closed_form_deviation(sys: &RadialSystem, grid: &[f64], values: &[Vec<C64>]) -> Result<Option<f64>> {
    if values.len() != 2 || (sys.profiles.w(grid[0]).abs() > 0.0 && sys.case_tag != CaseTag::KReduced) {
        return Ok(None);
    }
    let Some(b0) = closed_form_basis(sys, grid[0]) else { return Ok(None) };
    let b0 = b0?;
    let m = Matrix2::new(b0[0][0], b0[1][0], b0[0][1], b0[1][1]);
    let Some(inv) = m.try_inverse() else { return Ok(None) };
    let c = inv * Vector2::new(values[0][0], values[1][0]);
    let mut worst = 0.0f64;
    let mut size = 0.0f64;
    for (i, &r) in grid.iter().enumerate() {
        let b = closed_form_basis(sys, r).expect("basis exists")?;
        for q in 0..2 {
            let cf = c[0] * b[0][q] + c[1] * b[1][q];
            worst = worst.max((values[q][i] - cf).norm());
            size = size.max(values[q][i].norm());
        }
    }
    Ok(Some(worst / size.max(1e-300)))
}

/// Solves a radial request; incompatible combinations give an
/// [`IsoError::Incompatible`] carrying the JSON report.
pub fn radial_export(req: &RadialRequest) -> Result<RadialExport> {
    let sys = match reduced_system(req)? {
        Ok(s) => s,
        Err(rep) => return Err(IsoError::Incompatible(serde_json::to_string(&rep)?)),
    };
    let sol = solve(&sys, req.boundary, &req.grid)?;
    let parent = parent_residual(&sys, &sol)?;
    let closed = closed_form_deviation(&sys, &sol.grid, &sol.values)?;
    Ok(RadialExport {
        case_tag: sys.case_tag,
        j: req.j,
        delta: req.delta,
        mu: sys.mu,
        a: req.a,
        epsilon: req.epsilon,
        mass: req.mass,
        profile: req.profile,
        boundary: req.boundary,
        residual_norm: sol.residual_norm,
        parent_residual: parent,
        closed_form_deviation: closed,
        unknowns: sol.unknowns,
        grid: sol.grid,
        values: sol.values,
    })
}

/// Radial export as CSV: `#`-prefixed metadata lines followed by
/// `r, re(u), im(u)` columns for every unknown.
pub fn radial_csv(x: &RadialExport) -> Result<String> {
    let mut head = String::new();
    let _ = writeln!(head, "# case_tag={}", x.case_tag);
    let _ = writeln!(head, "# j={} delta={} mu={}", x.j, x.delta, x.mu.map(|m| m.to_string()).unwrap_or_else(|| "none".into()));
    let _ = writeln!(
        head,
        "# a={} epsilon={} mass={} profile={} boundary={}",
        x.a,
        num(x.epsilon),
        num(x.mass),
        tag(&x.profile)?,
        tag(&x.boundary)?
    );
    let _ = writeln!(head, "# solver_tol={} residual_norm={} parent_residual={}", num(SOLVER_TOL), num(x.residual_norm), num(x.parent_residual));
    if let Some(d) = x.closed_form_deviation {
        let _ = writeln!(head, "# closed_form_deviation={}", num(d));
    }
    let body = csv_string(|w| {
        let mut hdr = vec!["r".to_string()];
        for u in &x.unknowns {
            hdr.push(format!("re_{u}"));
            hdr.push(format!("im_{u}"));
        }
        w.write_record(&hdr)?;
        for (i, &r) in x.grid.iter().enumerate() {
            let mut rec = vec![num(r)];
            for col in &x.values {
                rec.push(num(col[i].re));
                rec.push(num(col[i].im));
            }
            w.write_record(&rec)?;
        }
        Ok(())
    })?;
    Ok(head + &body)
}

// ---------------------------------------------------------------- selection

/// The predicate truth table as CSV.
pub fn truth_table_csv(rows: &[TruthRow]) -> Result<String> {
    csv_string(|w| {
        w.write_record(["omega", "delta", "delta_prime", "j", "j_prime", "factor", "verdict"])?;
        for r in rows {
            w.write_record([
                r.omega.to_string(),
                r.delta.to_string(),
                r.delta_prime.to_string(),
                r.j.to_string(),
                r.j_prime.to_string(),
                num(r.factor),
                r.verdict.to_string(),
            ])?;
        }
        Ok(())
    })
}

/// Quadrature magnitude below which a sweep matrix element counts as zero.
pub const SWEEP_ZERO: f64 = 1e-7;

/// The quadrature sweep as CSV, with the numerical verdict at `threshold`.
pub fn sweep_csv(rows: &[SweepRow], threshold: f64) -> Result<String> {
    csv_string(|w| {
        w.write_record([
            "observable", "omega", "a", "j", "delta", "j_prime", "delta_prime", "predicate", "re_value", "im_value",
            "abs_value", "quadrature_zero", "agrees",
        ])?;
        for r in rows {
            let zero = r.value.norm() < threshold;
            w.write_record([
                r.observable.clone(),
                r.omega.to_string(),
                r.a.to_string(),
                r.j.to_string(),
                r.delta.to_string(),
                r.j_prime.to_string(),
                r.delta_prime.to_string(),
                r.predicate.to_string(),
                num(r.value.re),
                num(r.value.im),
                num(r.value.norm()),
                zero.to_string(),
                (zero == (r.predicate == Selection::Vanishes)).to_string(),
            ])?;
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- expectation

/// One expectation value with its case label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationPoint {
    pub case: ExpectationCase,
    pub a: ChiralParameter,
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub j: HalfInt,
    /// General closed form.
    pub value: C64,
    /// The regime-specific closed form.
    pub case_value: C64,
}

/// Expectation values of `N_A` over a `Gamma` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationExport {
    pub alpha: f64,
    pub beta: f64,
    pub j: HalfInt,
    pub tolerance: f64,
    pub points: Vec<ExpectationPoint>,
}

/// The four representative parameters, one per regime.
pub fn default_expectation_parameters() -> Vec<ChiralParameter> {
    [(0.0, 0.0), (0.7, 0.0), (0.0, 0.4), (0.7, 0.4)]
        .into_iter()
        .map(|(f, g)| ChiralParameter::from_parts(f, g).expect("finite"))
        .collect()
}

/// Evaluates the expectation value for every `A` and `Gamma`.
pub fn expectation_export(a_values: &[ChiralParameter], gammas: &[f64], alpha: f64, beta: f64, j: HalfInt) -> ExpectationExport {
    let mut points = Vec::with_capacity(a_values.len() * gammas.len());
    for a in a_values {
        for &g in gammas {
            points.push(ExpectationPoint {
                case: expectation_case(a),
                a: *a,
                gamma: g,
                alpha,
                beta,
                j,
                value: expectation_n(a, g, alpha, beta, j),
                case_value: expectation_case_formula(a, g, alpha, beta, j),
            });
        }
    }
    ExpectationExport { alpha, beta, j, tolerance: 1e-12, points }
}

/// Expectation values as CSV.
pub fn expectation_csv(x: &ExpectationExport) -> Result<String> {
    csv_string(|w| {
        w.write_record(["case", "f", "g", "gamma", "alpha", "beta", "j", "re_value", "im_value", "re_case_value", "im_case_value"])?;
        for p in &x.points {
            w.write_record([
                tag(&p.case)?,
                num(p.a.f()),
                num(p.a.g()),
                num(p.gamma),
                num(p.alpha),
                num(p.beta),
                p.j.to_string(),
                num(p.value.re),
                num(p.value.im),
                num(p.case_value.re),
                num(p.case_value.im),
            ])?;
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- decompose

/// Parameters of a doublet decomposition in the simplest monopole background.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecomposeRequest {
    pub j: HalfInt,
    pub m: HalfInt,
    pub delta: i8,
    pub mu: Option<i8>,
    pub a: ChiralParameter,
    pub epsilon: f64,
    pub mass: f64,
    pub grid: Vec<f64>,
    /// Radial node at which the angular decompositions are taken.
    pub node: usize,
}

/// Summary of one Abelian factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbelianFactor {
    pub eg: HalfInt,
    pub mu: Option<i8>,
    pub minimal: bool,
    pub coefficient: C64,
}

/// Factorization, Cartesian blocks and spinor expansions of one doublet state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecomposeExport {
    pub request: DecomposeRequest,
    pub r: f64,
    pub factors: Vec<AbelianFactor>,
    pub cartesian: CartesianDecomposition,
    pub sigma: SigmaDecomposition,
    /// Present at `A = 0`.
    pub sigma_reduced: Option<SigmaDecomposition>,
    /// Largest reconstruction error of each decomposition over sample angles.
    pub factorization_residual: f64,
    pub cartesian_residual: f64,
    pub sigma_residual: f64,
}

/// Builds the doublet state and all of its decompositions.
pub fn decompose_export(req: &DecomposeRequest) -> Result<DecomposeExport> {
    let st = monopole_doublet(req.j, req.m, req.delta, req.mu, req.a, req.epsilon, req.mass, &req.grid)?;
    let i = req.node;
    if i >= st.len() {
        return Err(IsoError::Domain(format!("node {i} outside a grid of {} points", st.len())));
    }
    let fac = factorize(&st)?;
    let cart_state = to_gauge(&st, Gauge::Cartesian);
    let cartesian = decompose_cartesian(&cart_state, i)?;
    let sigma = cartesian_doublet_sigma(&st, i)?;
    let sigma_reduced = if st.a.a == C64::new(0.0, 0.0) { Some(sigma_at_zero_a(&st, i)?) } else { None };
    let cc = to_tetrad(&cart_state, Tetrad::Cartesian);
    let (mut fr, mut cr, mut sr) = (0.0f64, 0.0f64, 0.0f64);
    for (t, p) in sample_angles() {
        fr = fr.max(max_diff(&st.eval(i, t, p), &fac.eval(i, t, p)));
        cr = cr.max(max_diff(&cart_state.eval(i, t, p), &cartesian.eval(t, p)));
        let (sp, sm) = cc.eval_pauli(i, t, p);
        let mut check = |d: &SigmaDecomposition| -> Result<()> {
            let (ep, em) = d.eval(t, p)?;
            sr = sr.max(max_diff(&sp, &ep).max(max_diff(&sm, &em)));
            Ok(())
        };
        check(&sigma)?;
        if let Some(rd) = &sigma_reduced {
            check(rd)?;
        }
    }
    let factor = |s: &crate::wavefunctions::AbelianMonopoleState, c: C64| AbelianFactor {
        eg: s.eg,
        mu: s.mu,
        minimal: s.is_minimal(),
        coefficient: c,
    };
    Ok(DecomposeExport {
        request: req.clone(),
        r: req.grid[i],
        factors: vec![factor(&fac.upper, fac.coefficients[0]), factor(&fac.lower, fac.coefficients[1])],
        cartesian,
        sigma,
        sigma_reduced,
        factorization_residual: fr,
        cartesian_residual: cr,
        sigma_residual: sr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::uniform_grid;
    use crate::selection::truth_table;

    #[test]
    fn default_tables_are_the_printed_ones() {
        let cells = table_cells(None).unwrap();
        assert_eq!(cells.len(), 2 * printed_tables().len());
        assert!(cells.iter().all(|c| c.matches_printed == Some(true)));
        assert_eq!(cells.iter().filter(|c| c.sign < 0).count(), 6);
        let ext = table_cells(Some(HalfInt::from_twice(5))).unwrap();
        // Column m' = +-1/2 gains j = 5/2.
        assert_eq!(ext.len(), cells.len() + 2 * 2 * 6);
        assert!(ext.iter().any(|c| c.printed.is_none() && c.j == HalfInt::from_twice(5) && c.mprime == HalfInt::HALF));
        assert_eq!(tables_csv(&cells).unwrap(), tables_csv(&table_cells(None).unwrap()).unwrap());
    }

    #[test]
    fn truth_table_has_32_rows() {
        let rows = truth_table(&[HalfInt::ONE, HalfInt::int(2)]).unwrap();
        let csv = truth_table_csv(&rows).unwrap();
        assert_eq!(csv.lines().count(), 33);
        assert!(csv.lines().nth(1).unwrap().starts_with("1,1,1,1,1,"));
    }

    #[test]
    fn radial_j0_free_matches_closed_form() {
        let req = RadialRequest {
            j: HalfInt::ZERO,
            delta: 1,
            mu: None,
            a: ChiralParameter::zero(),
            epsilon: 2.0,
            mass: 1.0,
            profile: ProfileKind::Monopole,
            boundary: Boundary::RegularAtOrigin,
            grid: uniform_grid(0.1, 10.0, 50),
        };
        let x = radial_export(&req).unwrap();
        assert_eq!(x.case_tag, CaseTag::J0Free);
        assert!(x.closed_form_deviation.unwrap() < 1e-8);
        let csv = radial_csv(&x).unwrap();
        assert!(csv.starts_with("# case_tag=j0_free\n"));
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 51);
        let k = RadialRequest { j: HalfInt::int(2), mu: Some(-1), ..req.clone() };
        let x = radial_export(&k).unwrap();
        assert_eq!(x.case_tag, CaseTag::KReduced);
        assert!(x.closed_form_deviation.unwrap() < 1e-8);
    }

    #[test]
    fn incompatible_request_is_structured() {
        let req = RadialRequest {
            j: HalfInt::ONE,
            delta: 1,
            mu: Some(1),
            a: ChiralParameter::from_parts(0.0, 1.0).unwrap(),
            epsilon: 2.0,
            mass: 1.0,
            profile: ProfileKind::Free,
            boundary: Boundary::RegularAtOrigin,
            grid: uniform_grid(0.5, 2.0, 5),
        };
        match radial_export(&req) {
            Err(IsoError::Incompatible(msg)) => {
                let rep: IncompatibilityReport = serde_json::from_str(&msg).unwrap();
                assert_eq!(rep.kinds, vec![crate::radial::IncompatibilityKind::ChiralParameter]);
            }
            other => panic!("expected incompatibility, got {other:?}"),
        }
    }

    #[test]
    fn expectation_trivial_case_is_cos_2gamma() {
        let gammas: Vec<f64> = (0..5).map(|k| k as f64 * 0.3).collect();
        let x = expectation_export(&[ChiralParameter::zero()], &gammas, 0.2, 1.1, HalfInt::ONE);
        for p in &x.points {
            assert!((p.value - C64::new((2.0 * p.gamma).cos(), 0.0)).norm() < 1e-15);
            assert_eq!(p.case, ExpectationCase::Trivial);
        }
        assert!(expectation_csv(&x).unwrap().lines().count() == 6);
    }

    #[test]
    fn decomposition_reconstructs() {
        let req = DecomposeRequest {
            j: HalfInt::ONE,
            m: HalfInt::ZERO,
            delta: 1,
            mu: Some(1),
            a: ChiralParameter::zero(),
            epsilon: 2.0,
            mass: 1.0,
            grid: uniform_grid(0.5, 4.0, 8),
            node: 3,
        };
        let x = decompose_export(&req).unwrap();
        assert!(x.sigma_reduced.is_some());
        assert!(x.factorization_residual < 1e-11 && x.cartesian_residual < 1e-11 && x.sigma_residual < 1e-11);
        assert_eq!(x.factors[0].eg, -HalfInt::HALF);
        assert!(decompose_export(&DecomposeRequest { node: 99, ..req }).is_err());
    }

    #[test]
    fn potential_export_round_trips() {
        let set = PotentialSet::schwinger(ProfileFunctions::simplest_monopole(1.0));
        let x = potential_export(&set, &[1.0, 2.0], 3).unwrap();
        assert_eq!(x.samples.len(), 18);
        let s = to_json(&x).unwrap();
        let back: PotentialExport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
    }
}
