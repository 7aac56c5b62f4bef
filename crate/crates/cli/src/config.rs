//! Run configuration: defaults, `key = value` config files and flag overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use isochiral_core::discrete::ChiralParameter;
use isochiral_core::export::{Format, ProfileKind, SWEEP_ZERO};
use isochiral_core::quadrature::uniform_grid;
use isochiral_core::radial::Boundary;
use isochiral_core::verify::{default_tolerances, DEFAULT_SEED};
use isochiral_core::HalfInt;
use serde::Serialize;

/// A configuration or flag value that could not be used.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Uniform radial grid `start:end:n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialGrid {
    pub start: f64,
    pub end: f64,
    pub n: usize,
}

impl RadialGrid {
    pub fn points(&self) -> Vec<f64> {
        uniform_grid(self.start, self.end, self.n)
    }
}

/// Every setting a subcommand may read.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub j_max: Option<HalfInt>,
    /// Chiral parameters; empty means the command default.
    pub a: Vec<ChiralParameter>,
    pub grid_r: RadialGrid,
    /// Polar quadrature nodes; the azimuthal count is twice this.
    pub grid_theta: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub j: HalfInt,
    pub m: HalfInt,
    pub delta: i8,
    pub mu: Option<i8>,
    pub epsilon: f64,
    pub mass: f64,
    pub profile: ProfileKind,
    pub boundary: Boundary,
    pub gamma_points: usize,
    pub alpha: f64,
    pub beta: f64,
    pub node: usize,
    /// `truth` or `sweep`.
    pub selection_mode: String,
    /// Verification tolerances by property group, plus `selection.sweep_zero`.
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut tolerances = default_tolerances();
        tolerances.insert("selection.sweep_zero".into(), SWEEP_ZERO);
        RunConfig {
            j_max: None,
            a: Vec::new(),
            grid_r: RadialGrid { start: 0.1, end: 10.0, n: 100 },
            grid_theta: 32,
            format: Format::Csv,
            out: None,
            seed: DEFAULT_SEED,
            j: HalfInt::ONE,
            m: HalfInt::ZERO,
            delta: 1,
            mu: Some(1),
            epsilon: 2.0,
            mass: 1.0,
            profile: ProfileKind::Monopole,
            boundary: Boundary::RegularAtOrigin,
            gamma_points: 13,
            alpha: 0.0,
            beta: 0.0,
            node: 0,
            selection_mode: "truth".into(),
            tolerances,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, UsageError>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e| UsageError(format!("invalid value '{v}' for {key}: {e}")))
}

fn parse_sign(key: &str, v: &str) -> Result<i8, UsageError> {
    match parse::<i8>(key, v)? {
        s @ (1 | -1) => Ok(s),
        s => Err(UsageError(format!("{key} must be +1 or -1, got {s}"))),
    }
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), UsageError> {
        let v = value.trim();
        match key {
            "j_max" => self.j_max = Some(parse(key, v)?),
            "a" => {
                self.a = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse(key, s))
                    .collect::<Result<_, _>>()?
            }
            "grid_r" => {
                let parts: Vec<&str> = v.split(':').collect();
                let [s, e, n] = parts[..] else {
                    return Err(UsageError(format!("grid_r must be start:end:n, got '{v}'")));
                };
                let g = RadialGrid { start: parse(key, s)?, end: parse(key, e)?, n: parse(key, n)? };
                if !(g.start > 0.0 && g.end > g.start && g.n >= 2) {
                    return Err(UsageError(format!("grid_r needs 0 < start < end and n >= 2, got '{v}'")));
                }
                self.grid_r = g;
            }
            "grid_theta" => {
                self.grid_theta = parse(key, v)?;
                if self.grid_theta < 2 {
                    return Err(UsageError("grid_theta must be at least 2".into()));
                }
            }
            "format" => self.format = parse(key, v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            "seed" => self.seed = parse(key, v)?,
            "j" => self.j = parse(key, v)?,
            "m" => self.m = parse(key, v)?,
            "delta" => self.delta = parse_sign(key, v)?,
            "mu" => self.mu = if v == "none" { None } else { Some(parse_sign(key, v)?) },
            "epsilon" => self.epsilon = parse(key, v)?,
            "mass" => self.mass = parse(key, v)?,
            "profile" => self.profile = parse(key, v)?,
            "boundary" => self.boundary = parse(key, v)?,
            "gamma_points" => {
                self.gamma_points = parse(key, v)?;
                if self.gamma_points < 2 {
                    return Err(UsageError("gamma_points must be at least 2".into()));
                }
            }
            "alpha" => self.alpha = parse(key, v)?,
            "beta" => self.beta = parse(key, v)?,
            "node" => self.node = parse(key, v)?,
            "selection_mode" => match v {
                "truth" | "sweep" => self.selection_mode = v.into(),
                _ => return Err(UsageError(format!("selection_mode must be truth or sweep, got '{v}'"))),
            },
            _ => match key.strip_prefix("tolerance.") {
                Some(name) if self.tolerances.contains_key(name) => {
                    let t: f64 = parse(key, v)?;
                    if t.is_nan() || t < 0.0 {
                        return Err(UsageError(format!("{key} must be non-negative")));
                    }
                    self.tolerances.insert(name.into(), t);
                }
                _ => return Err(UsageError(format!("unknown configuration key '{key}'"))),
            },
        }
        Ok(())
    }

    /// Applies a config text of `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), UsageError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(UsageError(format!("{origin}:{}: expected key = value", n + 1)));
            };
            let v = v.trim().trim_matches('"');
            self.set(k.trim(), v).map_err(|e| UsageError(format!("{origin}:{}: {e}", n + 1)))?;
        }
        Ok(())
    }

    /// Reads and applies a config file.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// The first chiral parameter, or zero.
    pub fn first_a(&self) -> ChiralParameter {
        self.a.first().copied().unwrap_or_else(ChiralParameter::zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_overrides_defaults() {
        let mut c = RunConfig::default();
        c.apply_text("# header\nj_max = 5/2\na = 0+1i, 0.5-0.2i\ngrid_r = 0.5:4:9 # trailing\ntolerance.wigner.unitarity = 1e-10\n", "t")
            .unwrap();
        assert_eq!(c.j_max, Some(HalfInt::from_twice(5)));
        assert_eq!(c.a.len(), 2);
        assert_eq!(c.grid_r.points().len(), 9);
        assert_eq!(c.tolerances["wigner.unitarity"], 1e-10);
    }

    #[test]
    fn bad_lines_are_reported() {
        let mut c = RunConfig::default();
        assert!(c.apply_text("nonsense", "t").unwrap_err().0.contains("t:1"));
        assert!(c.set("delta", "2").is_err());
        assert!(c.set("tolerance.no.such", "1").is_err());
        assert!(c.set("grid_r", "2:1:5").is_err());
        assert!(c.set("colour", "red").is_err());
    }
}
