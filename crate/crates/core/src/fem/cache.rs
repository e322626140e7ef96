//! On-disk cache of solved fields keyed by a content hash of the scenario.
//!
//! Entries hold the raw nodal pressure plus a fingerprint of the mesh it was
//! computed on. The mesh is regenerated (cheap and deterministic) when an
//! entry is loaded; a fingerprint mismatch or unreadable entry triggers a
//! fresh solve.

use super::solve::FieldSolution;
use super::RingsetScenario;
use crate::error::{Error, Result};
use crate::par::Exec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "SONOLINK_CACHE_DIR";
const DEFAULT_DIR: &str = ".sonolink-cache";
const FORMAT: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
    /// An entry existed but was unusable.
    Recomputed,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    format: u32,
    version: String,
    key: String,
    node_count: usize,
    mesh_fingerprint: String,
    residual: f64,
    pressure: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct KeyInput<'a> {
    format: u32,
    version: &'a str,
    scenario: &'a RingsetScenario,
}

#[derive(Debug, Clone)]
pub struct SolutionCache {
    dir: PathBuf,
}

impl SolutionCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Directory from the environment, defaulting to `.sonolink-cache`.
    pub fn from_env() -> Self {
        Self::new(std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| DEFAULT_DIR.into()))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Content hash of the canonical JSON form of the scenario.
    pub fn key(scenario: &RingsetScenario) -> String {
        let input = KeyInput { format: FORMAT, version: env!("CARGO_PKG_VERSION"), scenario };
        let json = serde_json::to_string(&input).expect("scenario serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn path_for(&self, scenario: &RingsetScenario) -> PathBuf {
        self.dir.join(format!("{}.json", Self::key(scenario)))
    }

    pub fn solve(&self, scenario: &RingsetScenario, exec: Exec) -> Result<FieldSolution> {
        self.solve_traced(scenario, exec).map(|(s, _)| s)
    }

    pub fn solve_traced(&self, scenario: &RingsetScenario, exec: Exec) -> Result<(FieldSolution, CacheStatus)> {
        scenario.validate()?;
        let key = Self::key(scenario);
        let path = self.dir.join(format!("{key}.json"));
        let mesh = scenario.build_mesh()?;
        let mut status = CacheStatus::Miss;
        if path.exists() {
            match self.load(&path, &key, &mesh) {
                Ok((p, residual)) => {
                    let wave = scenario.medium.wave_vector(scenario.frequency)?;
                    let sol = FieldSolution::from_raw(scenario.clone(), mesh, p, residual, wave);
                    return Ok((sol, CacheStatus::Hit));
                }
                Err(e) => {
                    log::warn!("ignoring cache entry {}: {e}; recomputing", path.display());
                    status = CacheStatus::Recomputed;
                }
            }
        }
        let sol = FieldSolution::solve_on(scenario, mesh, exec)?;
        if let Err(e) = self.store(&path, &key, &sol) {
            log::warn!("could not write cache entry {}: {e}", path.display());
        }
        Ok((sol, status))
    }

    fn load(&self, path: &Path, key: &str, mesh: &super::AxiMesh) -> Result<(Vec<Complex64>, f64)> {
        let text = std::fs::read_to_string(path)?;
        let e: Entry = serde_json::from_str(&text).map_err(|e| Error::Cache(format!("unreadable entry: {e}")))?;
        if e.format != FORMAT || e.key != key || e.version != env!("CARGO_PKG_VERSION") {
            return Err(Error::Cache("entry was written for a different scenario or version".into()));
        }
        if e.node_count != mesh.node_count() || e.pressure.len() != mesh.node_count() {
            return Err(Error::Cache("node count does not match the regenerated mesh".into()));
        }
        if e.mesh_fingerprint != mesh.fingerprint() {
            return Err(Error::Cache("mesh fingerprint mismatch".into()));
        }
        if e.pressure.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Cache("non-finite pressure values".into()));
        }
        Ok((e.pressure.iter().map(|p| Complex64::new(p[0], p[1])).collect(), e.residual))
    }

    fn store(&self, path: &Path, key: &str, sol: &FieldSolution) -> Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        let entry = Entry {
            format: FORMAT,
            version: env!("CARGO_PKG_VERSION").into(),
            key: key.into(),
            node_count: sol.mesh.node_count(),
            mesh_fingerprint: sol.mesh.fingerprint(),
            residual: sol.residual,
            pressure: sol.raw_pressure().iter().map(|p| [p.re, p.im]).collect(),
        };
        let json = serde_json::to_string(&entry).map_err(|e| Error::Cache(e.to_string()))?;
        // Write-then-rename keeps readers from seeing a partial entry.
        let tmp = self.dir.join(format!("{key}.{}.tmp", std::process::id()));
        std::fs::write(&tmp, json)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}
