//! Settings merged from flags, a flat key = value (TOML) file and defaults.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use geon_core::radial::SolverConfig;
use geon_core::rates::RateConfig;
use geon_core::response::ResponseConfig;
use geon_core::table::default_upper_frequency;
use geon_core::{FrequencyGrid, VacuumKind};

use crate::args::{GlobalArgs, PointArgs};
use crate::CliError;

pub const CACHE_ENV: &str = "UDW_CACHE_DIR";
const DEFAULT_CACHE: &str = ".geon-cache";

const KEYS: &[&str] = &[
    "vacuum", "r", "omega", "omega_t", "sigma", "tau0", "l_max", "omega_min", "omega_max", "nodes",
    "ode_rtol", "quad_rtol", "ir_closure", "tau0_budget", "pv_window", "pv_tol", "cache_dir",
];

#[derive(Debug, Default)]
pub struct ConfigFile {
    path: Option<PathBuf>,
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, Some(path.to_path_buf()))
    }

    /// Top-level TOML scalars only; a list of strings is joined with commas.
    pub fn parse(text: &str, path: Option<PathBuf>) -> Result<Self, CliError> {
        let origin = path.as_ref().map_or("config".into(), |p| p.display().to_string());
        let table: toml::Table = text.parse().map_err(|e| CliError::Usage(format!("{origin}: {e}")))?;
        let mut values = HashMap::new();
        for (k, v) in table {
            let key = k.replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("{origin}: unknown key '{k}'")));
            }
            let text = match v {
                toml::Value::String(s) => s,
                toml::Value::Integer(i) => i.to_string(),
                toml::Value::Float(x) => x.to_string(),
                toml::Value::Boolean(b) => b.to_string(),
                toml::Value::Array(items) => items
                    .iter()
                    .map(|i| i.as_str().map(str::to_string))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| CliError::Usage(format!("{origin}: {k} must list strings")))?
                    .join(","),
                _ => return Err(CliError::Usage(format!("{origin}: {k} must be a plain value"))),
            };
            values.insert(key, text);
        }
        Ok(Self { path, values })
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| {
                let origin = self.path.as_ref().map_or("config".into(), |p| p.display().to_string());
                CliError::Usage(format!("{origin}: bad value '{v}' for {key}: {e}"))
            }),
        }
    }

    /// Flag, else file, else nothing.
    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}

/// Table and tolerance settings shared by all commands.
#[derive(Debug, Clone)]
pub struct Numerics {
    pub l_max: u32,
    pub grid: FrequencyGrid,
    pub solver: SolverConfig,
    pub quad_rtol: f64,
    pub ir_closure: bool,
    pub cache_dir: PathBuf,
}

impl Numerics {
    pub fn resolve(g: &GlobalArgs, file: &ConfigFile) -> Result<Self, CliError> {
        let l_max = file.pick(g.l_max, "l_max")?.unwrap_or(10);
        let defaults = FrequencyGrid::default();
        let omega_min = file.pick(g.omega_min, "omega_min")?.unwrap_or(defaults.omega_min);
        let omega_max = match file.pick(g.omega_max, "omega_max")? {
            Some(v) => v,
            None if omega_min > 0.0 => default_upper_frequency(omega_min),
            None => defaults.omega_max,
        };
        let nodes = file.pick(g.nodes, "nodes")?.unwrap_or(defaults.nodes);
        let grid = FrequencyGrid::new(omega_min, omega_max, nodes).map_err(|e| CliError::Usage(e.to_string()))?;
        let mut solver = SolverConfig::default();
        if let Some(rtol) = file.pick(g.ode_rtol, "ode_rtol")? {
            positive(rtol, "ode_rtol")?;
            solver.ode.rtol = rtol;
        }
        let quad_rtol = file.pick(g.quad_rtol, "quad_rtol")?.unwrap_or(ResponseConfig::default().quad.rel_tol);
        positive(quad_rtol, "quad_rtol")?;
        let ir_closure = file.pick(g.ir_closure, "ir_closure")?.unwrap_or(true);
        let cache_dir = match &g.cache_dir {
            Some(d) => d.clone(),
            None => match std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
                Some(d) => PathBuf::from(d),
                None => file.get::<PathBuf>("cache_dir")?.unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE)),
            },
        };
        Ok(Self { l_max, grid, solver, quad_rtol, ir_closure, cache_dir })
    }

    pub fn response_config(&self, tau0_budget: Option<f64>) -> ResponseConfig {
        let mut cfg = ResponseConfig::default();
        cfg.quad.rel_tol = self.quad_rtol;
        cfg.ir_closure = self.ir_closure;
        if let Some(b) = tau0_budget {
            cfg.tau0_budget = b;
        }
        cfg
    }

    pub fn rate_config(&self, pv_window: Option<f64>, pv_tol: Option<f64>) -> RateConfig {
        let mut cfg = RateConfig::default();
        cfg.quad.rel_tol = self.quad_rtol;
        cfg.ir_closure = self.ir_closure;
        if let Some(w) = pv_window {
            cfg.pv_window = w;
        }
        if let Some(t) = pv_tol {
            cfg.pv_tol = t;
        }
        cfg
    }
}

/// The gap either directly or in units of the local temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gap {
    Absolute(f64),
    Thermal(f64),
}

#[derive(Debug, Clone)]
pub struct PointSettings {
    pub vacua: Vec<VacuumKind>,
    pub r: f64,
    pub gap: Gap,
    pub tau0: f64,
}

impl PointSettings {
    pub fn resolve(p: &PointArgs, file: &ConfigFile) -> Result<Self, CliError> {
        let vacua = if p.vacuum.is_empty() {
            match file.get::<String>("vacuum")? {
                Some(list) => list
                    .split(',')
                    .map(|v| v.trim().parse::<VacuumKind>().map_err(|e| CliError::Usage(e.to_string())))
                    .collect::<Result<Vec<_>, _>>()?,
                None => vec![VacuumKind::HartleHawking],
            }
        } else {
            p.vacuum.clone()
        };
        let r = file.pick(p.r, "r")?.unwrap_or(3.0);
        if !(r > 1.0 && r.is_finite()) {
            return Err(CliError::Usage(format!("radius {r} must lie outside the horizon (r > 1)")));
        }
        // A gap given on the command line beats either form in the file.
        let gap = match (p.omega, p.omega_t) {
            (Some(w), _) => Gap::Absolute(w),
            (None, Some(x)) => Gap::Thermal(x),
            (None, None) => match (file.get("omega")?, file.get("omega_t")?) {
                (Some(_), Some(_)) => {
                    return Err(CliError::Usage("config sets both omega and omega_t".into()));
                }
                (Some(w), None) => Gap::Absolute(w),
                (None, Some(x)) => Gap::Thermal(x),
                (None, None) => Gap::Absolute(0.0),
            },
        };
        let tau0 = file.pick(p.tau0, "tau0")?.unwrap_or(0.0);
        Ok(Self { vacua, r, gap, tau0 })
    }
}

pub fn sigma(flag: Option<f64>, file: &ConfigFile) -> Result<f64, CliError> {
    let s = file.pick(flag, "sigma")?.unwrap_or(100.0);
    positive(s, "sigma")?;
    Ok(s)
}

pub fn optional(flag: Option<f64>, file: &ConfigFile, key: &str) -> Result<Option<f64>, CliError> {
    let v = file.pick(flag, key)?;
    if let Some(x) = v {
        positive(x, key)?;
    }
    Ok(v)
}

fn positive(v: f64, name: &str) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must be positive, got {v}")))
    }
}
