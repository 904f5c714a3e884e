//! Precomputed |R_in|², |R_up|² over (l, ω) at one detector radius.

mod grid;
mod io;
mod pchip;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

pub use grid::{coordinate, default_upper_frequency, inverse_coordinate, FrequencyGrid, SPLIT};
pub use io::{load, load_expecting, persist, write_text};
pub use pchip::Pchip;

use crate::error::{Error, Result};
use crate::radial::{solve_modes_with, SolverConfig};

/// Fraction of entries allowed to fail before a build is rejected.
pub const MAX_FAILED_FRACTION: f64 = 1e-3;

/// Smallest amplitude kept before taking logarithms.
const FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableParams {
    pub r_det: f64,
    pub l_max: u32,
    pub grid: FrequencyGrid,
}

impl TableParams {
    pub fn new(r_det: f64, l_max: u32, grid: FrequencyGrid) -> Result<Self> {
        if !(r_det > 1.0 && r_det.is_finite()) {
            return Err(Error::domain(format!("detector radius {r_det} must exceed 1")));
        }
        grid.validate()?;
        Ok(Self { r_det, l_max, grid })
    }

    /// Stable key for cache file names; covers the parameters and the
    /// solver settings.
    pub fn cache_key(&self, solver: &SolverConfig) -> String {
        let mut h = Sha256::new();
        h.update(io::FORMAT_VERSION.to_le_bytes());
        h.update(self.r_det.to_le_bytes());
        h.update(self.l_max.to_le_bytes());
        h.update(self.grid.omega_min.to_le_bytes());
        h.update(self.grid.omega_max.to_le_bytes());
        h.update((self.grid.nodes as u64).to_le_bytes());
        h.update(format!("{solver:?}").as_bytes());
        let digest = h.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn describe(&self) -> String {
        format!(
            "r = {}, l_max = {}, omega in [{}, {}] with {} nodes",
            self.r_det, self.l_max, self.grid.omega_min, self.grid.omega_max, self.grid.nodes
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub r_in_sq: f64,
    pub r_up_sq: f64,
    pub unitarity_defect: f64,
    pub reciprocity_defect: f64,
    pub wronskian_drift: f64,
}

/// Immutable mode table. Entries are stored l-major.
#[derive(Debug, Clone)]
pub struct ModeTable {
    params: TableParams,
    omegas: Vec<f64>,
    entries: Vec<Entry>,
    /// (l, node) entries whose solve failed and were filled from neighbours.
    repaired: Vec<(u32, usize)>,
    interp: Vec<(Pchip, Pchip)>,
}

impl ModeTable {
    fn from_parts(params: TableParams, entries: Vec<Entry>, repaired: Vec<(u32, usize)>) -> Self {
        let omegas = params.grid.frequencies();
        let n = omegas.len();
        let s: Vec<f64> = omegas.iter().map(|&w| coordinate(w)).collect();
        let interp = (0..=params.l_max as usize)
            .map(|l| {
                let row = &entries[l * n..(l + 1) * n];
                let log_in = row.iter().map(|e| e.r_in_sq.max(FLOOR).ln()).collect();
                let log_up = row.iter().map(|e| e.r_up_sq.max(FLOOR).ln()).collect();
                (Pchip::new(s.clone(), log_in), Pchip::new(s.clone(), log_up))
            })
            .collect();
        Self { params, omegas, entries, repaired, interp }
    }

    pub fn params(&self) -> &TableParams {
        &self.params
    }

    pub fn r_det(&self) -> f64 {
        self.params.r_det
    }

    pub fn l_max(&self) -> u32 {
        self.params.l_max
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.params.grid
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.omegas
    }

    pub fn entry(&self, l: u32, node: usize) -> &Entry {
        &self.entries[l as usize * self.omegas.len() + node]
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn repaired(&self) -> &[(u32, usize)] {
        &self.repaired
    }

    pub fn worst_unitarity_defect(&self) -> f64 {
        self.entries.iter().map(|e| e.unitarity_defect).fold(0.0, f64::max)
    }

    pub fn worst_reciprocity_defect(&self) -> f64 {
        self.entries.iter().map(|e| e.reciprocity_defect).fold(0.0, f64::max)
    }

    pub fn worst_wronskian_drift(&self) -> f64 {
        self.entries.iter().map(|e| e.wronskian_drift).fold(0.0, f64::max)
    }

    /// (|R_in|², |R_up|²) at Killing frequency ω, interpolated in the
    /// logarithm of each amplitude.
    pub fn interpolate(&self, l: u32, omega: f64) -> Result<(f64, f64)> {
        if l > self.params.l_max {
            return Err(Error::TableL { l, l_max: self.params.l_max });
        }
        let (lo, hi) = (self.params.grid.omega_min, self.params.grid.omega_max);
        let slack = 1e-12;
        if !(omega >= lo * (1.0 - slack) && omega <= hi * (1.0 + slack)) {
            return Err(Error::TableRange { omega, min: lo, max: hi });
        }
        let omega = omega.clamp(lo, hi);
        if let Ok(k) = self.omegas.binary_search_by(|w| w.total_cmp(&omega)) {
            let e = self.entry(l, k);
            return Ok((e.r_in_sq, e.r_up_sq));
        }
        let s = coordinate(omega);
        let (p_in, p_up) = &self.interp[l as usize];
        Ok((p_in.eval(s).exp(), p_up.eval(s).exp()))
    }
}

/// Supplies a mode table for a detector radius.
pub trait TableSource: Sync {
    fn table(&self, r: f64) -> Result<Arc<ModeTable>>;
}

/// How a table was obtained from a [`TableCache`].
#[derive(Debug, Clone, PartialEq)]
pub enum CacheOutcome {
    /// Already held in memory.
    Memory,
    /// Read from the cache directory.
    Loaded(PathBuf),
    /// Computed and, with a cache directory, written to this path.
    Built(Option<PathBuf>),
    /// An unreadable file was replaced by a fresh build.
    Replaced { path: PathBuf, reason: String },
}

/// Builds tables on demand and keeps them for the life of the value,
/// optionally backed by a directory of persisted tables.
#[derive(Debug)]
pub struct TableCache {
    pub l_max: u32,
    pub grid: FrequencyGrid,
    pub solver: SolverConfig,
    directory: Option<PathBuf>,
    replace_unreadable: bool,
    built: Mutex<HashMap<u64, Arc<ModeTable>>>,
    log: Mutex<Vec<(f64, CacheOutcome)>>,
}

impl TableCache {
    pub fn new(l_max: u32, grid: FrequencyGrid) -> Self {
        Self::with_solver(l_max, grid, SolverConfig::default())
    }

    pub fn with_solver(l_max: u32, grid: FrequencyGrid, solver: SolverConfig) -> Self {
        Self {
            l_max,
            grid,
            solver,
            directory: None,
            replace_unreadable: false,
            built: Mutex::new(HashMap::new()),
            log: Mutex::new(Vec::new()),
        }
    }

    /// Persists tables under `dir`. A corrupt or mismatched file is an error
    /// unless `replace_unreadable` is set, in which case it is rebuilt.
    pub fn with_directory(mut self, dir: impl Into<PathBuf>, replace_unreadable: bool) -> Self {
        self.directory = Some(dir.into());
        self.replace_unreadable = replace_unreadable;
        self
    }

    pub fn params(&self, r: f64) -> Result<TableParams> {
        TableParams::new(r, self.l_max, self.grid)
    }

    /// File that holds (or would hold) the table at radius `r`.
    pub fn path_for(&self, r: f64) -> Result<Option<PathBuf>> {
        let params = self.params(r)?;
        Ok(self
            .directory
            .as_ref()
            .map(|d| d.join(format!("modes-{}.bin", params.cache_key(&self.solver)))))
    }

    /// Adds an existing table, e.g. one loaded from disk.
    pub fn insert(&self, table: ModeTable) -> Arc<ModeTable> {
        let table = Arc::new(table);
        let mut built = self.built.lock().expect("table cache poisoned");
        built.insert(table.r_det().to_bits(), Arc::clone(&table));
        table
    }

    /// Returns the table at `r` and where it came from.
    pub fn fetch(&self, r: f64) -> Result<(Arc<ModeTable>, CacheOutcome)> {
        if let Some(t) = self.built.lock().expect("table cache poisoned").get(&r.to_bits()) {
            return Ok((Arc::clone(t), CacheOutcome::Memory));
        }
        let params = self.params(r)?;
        let path = self.path_for(r)?;
        let mut replaced = None;
        if let Some(path) = path.as_ref().filter(|p| p.exists()) {
            match load_expecting(path, &params) {
                Ok(t) => {
                    let outcome = CacheOutcome::Loaded(path.clone());
                    return Ok((self.insert(t), outcome));
                }
                Err(e) if self.replace_unreadable && e.is_cache_defect() => replaced = Some(e.to_string()),
                Err(e) => return Err(e),
            }
        }
        // Built outside the lock so different radii can proceed together.
        let table = build_table_with(&params, &self.solver)?;
        if let Some(path) = &path {
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir)?;
            }
            persist(&table, path)?;
        }
        let outcome = match (replaced, path) {
            (Some(reason), Some(path)) => CacheOutcome::Replaced { path, reason },
            (_, path) => CacheOutcome::Built(path),
        };
        Ok((self.insert(table), outcome))
    }

    /// Outcomes of every lookup made through [`TableSource`], in order.
    pub fn take_log(&self) -> Vec<(f64, CacheOutcome)> {
        std::mem::take(&mut *self.log.lock().expect("table cache poisoned"))
    }
}

impl TableSource for TableCache {
    fn table(&self, r: f64) -> Result<Arc<ModeTable>> {
        let (t, outcome) = self.fetch(r)?;
        self.log.lock().expect("table cache poisoned").push((r, outcome));
        Ok(t)
    }
}

impl TableSource for Arc<ModeTable> {
    fn table(&self, r: f64) -> Result<Arc<ModeTable>> {
        if r.to_bits() != self.r_det().to_bits() {
            return Err(Error::domain(format!(
                "table was built for r = {}, requested r = {r}",
                self.r_det()
            )));
        }
        Ok(Arc::clone(self))
    }
}

/// Solves every (l, node) pair in parallel. The result does not depend on
/// scheduling: each entry is a pure function of its own (l, ω).
pub fn build_table(r_det: f64, l_max: u32, grid: FrequencyGrid) -> Result<ModeTable> {
    build_table_with(&TableParams::new(r_det, l_max, grid)?, &SolverConfig::default())
}

pub fn build_table_with(params: &TableParams, solver: &SolverConfig) -> Result<ModeTable> {
    params.grid.validate()?;
    let omegas = params.grid.frequencies();
    let n = omegas.len();
    let total = n * (params.l_max as usize + 1);
    let results: Vec<Result<Entry>> = (0..total)
        .into_par_iter()
        .map(|i| {
            let l = (i / n) as u32;
            let s = solve_modes_with(l, omegas[i % n], params.r_det, solver)?;
            let (r_in_sq, r_up_sq) = s.amplitudes();
            Ok(Entry {
                r_in_sq,
                r_up_sq,
                unitarity_defect: s.unitarity_defect(),
                reciprocity_defect: s.reciprocity_defect(),
                wronskian_drift: s.wronskian_drift,
            })
        })
        .collect();

    let failures: Vec<(usize, String)> = results
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.as_ref().err().map(|e| (i, e.to_string())))
        .collect();
    if failures.len() as f64 > MAX_FAILED_FRACTION * total as f64 {
        let (i, msg) = &failures[0];
        return Err(Error::TableBuild {
            failed: failures.len(),
            total,
            first: format!("l = {}, omega = {}: {msg}", i / n, omegas[i % n]),
        });
    }
    let mut entries: Vec<Option<Entry>> = results.into_iter().map(Result::ok).collect();
    let mut repaired = Vec::new();
    for (i, _) in &failures {
        let (l, k) = (i / n, i % n);
        let row = &entries[l * n..(l + 1) * n];
        let left = (0..k).rev().find(|&j| row[j].is_some());
        let right = (k + 1..n).find(|&j| row[j].is_some());
        let filled = match (left, right) {
            (Some(a), Some(b)) => {
                let (ea, eb) = (row[a].unwrap(), row[b].unwrap());
                let t = (coordinate(omegas[k]) - coordinate(omegas[a]))
                    / (coordinate(omegas[b]) - coordinate(omegas[a]));
                let mix = |x: f64, y: f64| (x.max(FLOOR).ln() * (1.0 - t) + y.max(FLOOR).ln() * t).exp();
                Entry {
                    r_in_sq: mix(ea.r_in_sq, eb.r_in_sq),
                    r_up_sq: mix(ea.r_up_sq, eb.r_up_sq),
                    unitarity_defect: f64::NAN,
                    reciprocity_defect: f64::NAN,
                    wronskian_drift: f64::NAN,
                }
            }
            _ => {
                return Err(Error::TableBuild {
                    failed: failures.len(),
                    total,
                    first: format!("l = {l}, omega = {}: no neighbour to repair from", omegas[k]),
                })
            }
        };
        entries[*i] = Some(filled);
        repaired.push((l as u32, k));
    }
    let entries = entries.into_iter().map(|e| e.expect("filled")).collect();
    Ok(ModeTable::from_parts(*params, entries, repaired))
}

#[cfg(test)]
mod tests;
