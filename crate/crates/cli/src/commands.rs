//! Subcommand implementations. Each returns the rendered output and whether
//! a property check failed.

use std::f64::consts::PI;
use std::fmt::Write as _;

use isochiral_core::export::{
    decompose_export, default_expectation_parameters, expectation_csv, expectation_export, radial_csv, radial_export,
    sweep_csv, table_cells, tables_csv, to_json, truth_table_csv, DecomposeRequest, Format, RadialRequest,
};
use isochiral_core::quadrature::{uniform_grid, SphereGrid};
use isochiral_core::selection::{predicate_sweep, truth_table, Selection};
use isochiral_core::verify::{run_suite, Fault, VerifyOptions};
use isochiral_core::{HalfInt, IsoError};
use serde::Serialize;
use serde_json::json;

use crate::config::{RunConfig, UsageError};

/// Rendered output of a subcommand.
pub struct Output {
    pub text: String,
    /// A verified property did not hold.
    pub property_failed: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, property_failed: false }
    }
}

/// Why a subcommand stopped.
#[derive(Debug)]
pub enum CommandError {
    Usage(UsageError),
    Library(IsoError),
}

impl From<UsageError> for CommandError {
    fn from(e: UsageError) -> Self {
        CommandError::Usage(e)
    }
}

impl From<IsoError> for CommandError {
    fn from(e: IsoError) -> Self {
        CommandError::Library(e)
    }
}

type CmdResult = Result<Output, CommandError>;

fn json<T: Serialize>(v: &T) -> Result<String, CommandError> {
    Ok(to_json(v)?)
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Boundary-value tables, optionally extended to `j_max`.
pub fn tables(c: &RunConfig) -> CmdResult {
    let cells = table_cells(c.j_max)?;
    Ok(Output::ok(match c.format {
        Format::Csv => tables_csv(&cells)?,
        Format::Json => json(&cells)?,
    }))
}

/// Full property suite as a JSON report.
pub fn verify(c: &RunConfig, fault: Option<&str>, only: &[String]) -> CmdResult {
    let fault = fault.map(|f| f.parse::<Fault>()).transpose().map_err(|e| UsageError(e.to_string()))?;
    let opts = VerifyOptions { seed: c.seed, fault, only: only.to_vec(), tolerances: c.tolerances.clone() };
    let report = run_suite(&opts);
    if report.properties.is_empty() {
        return Err(UsageError(format!("no property group matches {only:?}")).into());
    }
    for name in &report.failures {
        eprintln!("property failed: {name}");
    }
    Ok(Output { text: json(&report)?, property_failed: !report.passed })
}

fn radial_request(c: &RunConfig) -> RadialRequest {
    RadialRequest {
        j: c.j,
        delta: c.delta,
        mu: c.mu,
        a: c.first_a(),
        epsilon: c.epsilon,
        mass: c.mass,
        profile: c.profile,
        boundary: c.boundary,
        grid: c.grid_r.points(),
    }
}

/// Radial solution with a metadata header.
pub fn radial(c: &RunConfig) -> CmdResult {
    let x = radial_export(&radial_request(c))?;
    Ok(Output::ok(match c.format {
        Format::Csv => radial_csv(&x)?,
        Format::Json => json(&x)?,
    }))
}

/// Selection-rule truth table or quadrature sweep.
pub fn selection(c: &RunConfig) -> CmdResult {
    if c.selection_mode == "sweep" {
        let threshold = c.tolerances["selection.sweep_zero"];
        let grid = SphereGrid::new(c.grid_theta, 2 * c.grid_theta)?;
        let rows = predicate_sweep(&grid)?;
        let disagree = rows.iter().filter(|r| (r.value.norm() < threshold) != (r.predicate == Selection::Vanishes)).count();
        let text = match c.format {
            Format::Csv => {
                let mut h = String::new();
                let _ = writeln!(h, "# mode=sweep cases={} grid_theta={} grid_phi={}", rows.len(), c.grid_theta, 2 * c.grid_theta);
                let _ = writeln!(h, "# states: m=1 mu=1 epsilon=2 mass=1 profile=monopole");
                let _ = writeln!(h, "# sweep_zero={} disagreements={disagree}", num(threshold));
                h + &sweep_csv(&rows, threshold)?
            }
            Format::Json => json(&json!({
                "mode": "sweep",
                "grid_theta": c.grid_theta,
                "grid_phi": 2 * c.grid_theta,
                "sweep_zero": threshold,
                "disagreements": disagree,
                "rows": rows,
            }))?,
        };
        return Ok(Output { text, property_failed: disagree > 0 });
    }
    let j_max = c.j_max.unwrap_or(HalfInt::int(2));
    if !j_max.is_integer() || j_max < HalfInt::ONE {
        return Err(UsageError(format!("selection needs an integer j_max >= 1, got {j_max}")).into());
    }
    let js: Vec<HalfInt> = (1..=j_max.to_int()?).map(HalfInt::int).collect();
    let rows = truth_table(&js)?;
    let js_text: Vec<String> = js.iter().map(|j| j.to_string()).collect();
    Ok(Output::ok(match c.format {
        Format::Csv => {
            let mut h = String::new();
            let _ = writeln!(h, "# mode=truth rows={} j={}", rows.len(), js_text.join(","));
            let _ = writeln!(h, "# vanishes iff 1 + omega*delta*delta_prime*(-1)^(j+j_prime) = 0");
            h + &truth_table_csv(&rows)?
        }
        Format::Json => json(&json!({ "mode": "truth", "j": js, "rows": rows }))?,
    }))
}

/// Expectation values of the discrete operator over a `Gamma` grid.
pub fn expectation(c: &RunConfig) -> CmdResult {
    let a = if c.a.is_empty() { default_expectation_parameters() } else { c.a.clone() };
    let gammas = uniform_grid(0.0, PI, c.gamma_points);
    let mut x = expectation_export(&a, &gammas, c.alpha, c.beta, c.j);
    x.tolerance = c.tolerances["discrete.expectation_cases"];
    let dev = x.points.iter().map(|p| (p.value - p.case_value).norm()).fold(0.0, f64::max);
    let text = match c.format {
        Format::Csv => {
            let mut h = String::new();
            let a_text: Vec<String> = a.iter().map(|a| a.to_string()).collect();
            let _ = writeln!(h, "# j={} alpha={} beta={} gamma_points={}", c.j, num(c.alpha), num(c.beta), c.gamma_points);
            let _ = writeln!(h, "# a={}", a_text.join(","));
            let _ = writeln!(h, "# tolerance={} max_case_deviation={}", num(x.tolerance), num(dev));
            h + &expectation_csv(&x)?
        }
        Format::Json => json(&json!({ "max_case_deviation": dev, "export": x }))?,
    };
    Ok(Output { text, property_failed: dev > x.tolerance })
}

/// Decompositions of one doublet state, as JSON.
pub fn decompose(c: &RunConfig) -> CmdResult {
    let req = DecomposeRequest {
        j: c.j,
        m: c.m,
        delta: c.delta,
        mu: c.mu,
        a: c.first_a(),
        epsilon: c.epsilon,
        mass: c.mass,
        grid: c.grid_r.points(),
        node: c.node,
    };
    let x = decompose_export(&req)?;
    let tol = ["wavefunctions.factorization", "wavefunctions.cartesian_decomposition", "wavefunctions.sigma_forms"]
        .map(|k| c.tolerances[k]);
    let failed = x.factorization_residual > tol[0] || x.cartesian_residual > tol[1] || x.sigma_residual > tol[2];
    Ok(Output { text: json(&x)?, property_failed: failed })
}
