//! Flat `key = value` run configuration.
//!
//! ```text
//! # test-1
//! kernel.family = power_law
//! kernel.p      = 2
//! model.N       = 10
//! model.S0      = 9
//! model.beta    = 0.3
//! ```
//!
//! Unknown keys, duplicate keys and parameters that do not belong to the
//! selected kernel family are errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use aoi_nsfd::{EpidemicModel, Kernel, SolverConfig};

use crate::CliError;

const KNOWN_KEYS: &[&str] = &[
    "kernel.family",
    "kernel.p",
    "kernel.mu",
    "kernel.sigma",
    "kernel.lambda",
    "kernel.normalized",
    "kernel.table",
    "model.N",
    "model.S0",
    "model.beta",
    "solver.eps_phi",
    "solver.eps_s",
    "solver.window",
    "solver.tail_tol",
];

/// Kernel parameters accepted by each family.
fn family_keys(family: &str) -> Option<&'static [&'static str]> {
    Some(match family {
        "power_law" => &["kernel.p"],
        "gaussian" => &["kernel.mu", "kernel.sigma"],
        "exponential" => &["kernel.lambda", "kernel.normalized"],
        "tabulated" => &["kernel.table"],
        _ => return None,
    })
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: EpidemicModel,
    pub eps_phi: f64,
    pub eps_s: f64,
    pub window: usize,
    pub tail_tol: f64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Parses configuration text; `kernel.table` paths resolve against
    /// `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let entries = parse_entries(text)?;
        let get = |key: &str| entries.get(key).map(|(_, v)| v.as_str());
        let family = get("kernel.family").ok_or_else(|| config("missing key kernel.family"))?;
        let allowed = family_keys(family).ok_or_else(|| {
            config(format!(
                "unknown kernel.family '{family}' (expected power_law, gaussian, exponential or tabulated)"
            ))
        })?;
        for key in entries.keys() {
            if key.starts_with("kernel.") && key != "kernel.family" && !allowed.contains(&key.as_str()) {
                let line = entries[key].0;
                return Err(config(format!(
                    "line {line}: {key} does not apply to kernel.family = {family}"
                )));
            }
        }
        let num = |key: &str| -> Result<f64, CliError> {
            let (line, raw) = entries.get(key).ok_or_else(|| config(format!("missing key {key}")))?;
            raw.parse::<f64>()
                .map_err(|_| config(format!("line {line}: {key} = '{raw}' is not a number")))
        };
        let opt_num = |key: &str, default: f64| {
            if entries.contains_key(key) {
                num(key)
            } else {
                Ok(default)
            }
        };

        let kernel = match family {
            "power_law" => Kernel::power_law(num("kernel.p")?),
            "gaussian" => Kernel::gaussian(num("kernel.mu")?, num("kernel.sigma")?),
            "exponential" => {
                let normalized = match get("kernel.normalized") {
                    None | Some("true") => true,
                    Some("false") => false,
                    Some(other) => return Err(config(format!("kernel.normalized = '{other}' is not true/false"))),
                };
                Kernel::exponential(num("kernel.lambda")?, normalized)
            }
            _ => {
                let rel = get("kernel.table").ok_or_else(|| config("missing key kernel.table"))?;
                let (grid, values) = read_table(&base.join(rel))?;
                Kernel::tabulated(grid, values)
            }
        }
        .map_err(|e| config(e.to_string()))?;

        let model = EpidemicModel::new(kernel, num("model.N")?, num("model.S0")?, num("model.beta")?)
            .map_err(|e| config(e.to_string()))?;
        let window = match entries.get("solver.window") {
            None => SolverConfig::DEFAULT_WINDOW,
            Some((line, raw)) => raw.parse::<usize>().map_err(|_| {
                config(format!(
                    "line {line}: solver.window = '{raw}' is not a positive integer"
                ))
            })?,
        };
        Ok(RunConfig {
            model,
            eps_phi: opt_num("solver.eps_phi", SolverConfig::DEFAULT_EPS)?,
            eps_s: opt_num("solver.eps_s", SolverConfig::DEFAULT_EPS)?,
            window,
            tail_tol: opt_num("solver.tail_tol", SolverConfig::DEFAULT_EPS)?,
        })
    }

    pub fn solver(&self, h: f64, t_max: f64) -> SolverConfig {
        SolverConfig {
            eps_phi: self.eps_phi,
            eps_s: self.eps_s,
            window: self.window,
            tail_tol: self.tail_tol,
            ..SolverConfig::new(h, t_max)
        }
    }
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Key → (line number, raw value).
fn parse_entries(text: &str) -> Result<BTreeMap<String, (usize, String)>, CliError> {
    let mut entries = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config(format!("line {line_no}: expected 'key = value'")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KNOWN_KEYS.contains(&key) {
            return Err(config(format!("line {line_no}: unknown key '{key}'")));
        }
        if value.is_empty() {
            return Err(config(format!("line {line_no}: empty value for {key}")));
        }
        if let Some((first, _)) = entries.insert(key.to_string(), (line_no, value.to_string())) {
            return Err(config(format!(
                "line {line_no}: duplicate key {key} (first set on line {first})"
            )));
        }
    }
    Ok(entries)
}

/// Two-column `t,A` CSV; a non-numeric first line is taken as a header.
fn read_table(path: &PathBuf) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut grid = Vec::new();
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match cols.as_slice() {
            [t, a] => t.parse::<f64>().ok().zip(a.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some((t, a)) => {
                grid.push(t);
                values.push(a);
            }
            None if i == 0 => {}
            None => {
                return Err(config(format!(
                    "{} line {}: expected two numbers 't,A'",
                    path.display(),
                    i + 1
                )));
            }
        }
    }
    Ok((grid, values))
}
