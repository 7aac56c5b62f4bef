//! `isochiral`: tables, verification and data export for the monopole doublet library.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isochiral_core::IsoError;

use commands::CommandError;
use config::{RunConfig, UsageError};

#[derive(Parser)]
#[command(name = "isochiral", version, about = "Rotation-function tables, property verification and radial, selection and expectation exports")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by every subcommand; each overrides the config file.
#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Largest j for table extensions and truth tables, e.g. 5/2.
    #[arg(long, global = true)]
    j_max: Option<String>,
    /// Chiral parameter "f+gi"; repeatable.
    #[arg(long = "a", global = true, allow_hyphen_values = true)]
    a: Vec<String>,
    /// Radial grid "start:end:n".
    #[arg(long, global = true)]
    grid_r: Option<String>,
    /// Polar quadrature nodes.
    #[arg(long, global = true)]
    grid_theta: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Output format: json or csv.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Seed of the randomized verification samples.
    #[arg(long, global = true)]
    seed: Option<String>,
}

/// Quantum numbers and kinematics of a single state.
#[derive(Args)]
struct StateArgs {
    #[arg(long, allow_hyphen_values = true)]
    j: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    m: Option<String>,
    /// Eigenvalue label of the discrete operator, +1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// Eigenvalue label of K, +1, -1 or none.
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mass: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Boundary values of the rotation functions at theta = 0 and pi.
    Tables,
    /// Runs every property group and writes a JSON report.
    Verify {
        /// Only groups whose names start with this prefix; repeatable.
        #[arg(long)]
        only: Vec<String>,
        /// Injects a known defect to exercise failure reporting.
        #[arg(long, hide = true)]
        fault: Option<String>,
    },
    /// Solves a separated radial system.
    Radial {
        #[command(flatten)]
        state: StateArgs,
        /// monopole or free.
        #[arg(long)]
        profile: Option<String>,
        /// regular, incoming or outgoing.
        #[arg(long)]
        boundary: Option<String>,
    },
    /// Selection-rule truth table or quadrature sweep.
    Selection {
        /// truth or sweep.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Expectation values of the discrete operator over a Gamma grid.
    Expectation {
        #[arg(long, allow_hyphen_values = true)]
        j: Option<String>,
        #[arg(long)]
        gamma_points: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
    },
    /// Abelian factorization and spinor expansions of a doublet state.
    Decompose {
        #[command(flatten)]
        state: StateArgs,
        /// Radial node of the angular decompositions.
        #[arg(long)]
        node: Option<String>,
    },
}

fn overrides(cli: &Cli) -> Vec<(&'static str, String)> {
    let c = &cli.common;
    let mut v: Vec<(&'static str, String)> = Vec::new();
    let mut push = |k: &'static str, x: &Option<String>| {
        if let Some(x) = x {
            v.push((k, x.clone()));
        }
    };
    push("j_max", &c.j_max);
    push("grid_r", &c.grid_r);
    push("grid_theta", &c.grid_theta);
    push("out", &c.out);
    push("format", &c.format);
    push("seed", &c.seed);
    let state = |s: &StateArgs| {
        [("j", &s.j), ("m", &s.m), ("delta", &s.delta), ("mu", &s.mu), ("epsilon", &s.epsilon), ("mass", &s.mass)]
            .into_iter()
            .filter_map(|(k, x)| x.clone().map(|x| (k, x)))
            .collect::<Vec<_>>()
    };
    match &cli.command {
        Command::Radial { state: s, profile, boundary } => {
            v.extend(state(s));
            v.extend(profile.clone().map(|x| ("profile", x)));
            v.extend(boundary.clone().map(|x| ("boundary", x)));
        }
        Command::Decompose { state: s, node } => {
            v.extend(state(s));
            v.extend(node.clone().map(|x| ("node", x)));
        }
        Command::Selection { mode } => v.extend(mode.clone().map(|x| ("selection_mode", x))),
        Command::Expectation { j, gamma_points, alpha, beta } => {
            for (k, x) in [("j", j), ("gamma_points", gamma_points), ("alpha", alpha), ("beta", beta)] {
                v.extend(x.clone().map(|x| (k, x)));
            }
        }
        Command::Tables | Command::Verify { .. } => {}
    }
    v
}

fn build_config(cli: &Cli) -> Result<RunConfig, UsageError> {
    let mut c = RunConfig::default();
    if let Some(p) = &cli.common.config {
        c.apply_file(p)?;
    }
    if !cli.common.a.is_empty() {
        c.set("a", &cli.common.a.join(","))?;
    }
    for (k, v) in overrides(cli) {
        c.set(k, &v)?;
    }
    Ok(c)
}

fn init_threads() -> Result<(), UsageError> {
    let Ok(v) = std::env::var("ISOCHIRAL_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| UsageError(format!("ISOCHIRAL_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| UsageError(format!("cannot configure thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<bool, CommandError> {
    init_threads()?;
    let c = build_config(cli)?;
    let out = match &cli.command {
        Command::Tables => commands::tables(&c)?,
        Command::Verify { only, fault } => commands::verify(&c, fault.as_deref(), only)?,
        Command::Radial { .. } => commands::radial(&c)?,
        Command::Selection { .. } => commands::selection(&c)?,
        Command::Expectation { .. } => commands::expectation(&c)?,
        Command::Decompose { .. } => commands::decompose(&c)?,
    };
    match &c.out {
        Some(p) => std::fs::write(p, &out.text).map_err(|e| IsoError::Io(format!("{}: {e}", p.display())))?,
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(out.text.as_bytes()).and_then(|_| so.flush()).map_err(IsoError::from)?;
        }
    }
    Ok(out.property_failed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(CommandError::Usage(e)) => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(CommandError::Library(IsoError::Incompatible(report))) => {
            let report: serde_json::Value = serde_json::from_str(&report).unwrap_or(serde_json::Value::String(report));
            let err = serde_json::json!({ "error": "incompatible", "report": report });
            eprintln!("{}", serde_json::to_string(&err).unwrap_or_default());
            ExitCode::from(2)
        }
        Err(CommandError::Library(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
