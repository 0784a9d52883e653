//! On-disk diagram and distance caches.
//!
//! Each cache is a delimited text file next to a `key=value` manifest that
//! carries the hash of every input the cached values depend on. A cache is
//! reused only when the stored hash matches; anything else is treated as
//! stale and recomputed. Floats are written in shortest round-trip form, so
//! a reload reproduces the computed values bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use topmix::{DistanceMatrix, PersistenceDiagram, PersistencePair};

use crate::error::PipelineError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: impl AsRef<[u8]>) -> String {
    hex::encode(Sha256::digest(bytes.as_ref()))
}

/// Ordered `key=value` lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest(pub BTreeMap<String, String>);

impl Manifest {
    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.0.insert(key.to_string(), value.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .filter_map(|l| l.split_once('='))
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .collect(),
        )
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.0 {
            writeln!(out, "{k}={v}").unwrap();
        }
        out
    }
}

/// `row,dimension,birth,death` with a header line.
pub fn diagrams_to_csv(diagrams: &[PersistenceDiagram]) -> String {
    let mut out = String::from("row,dimension,birth,death\n");
    for (row, d) in diagrams.iter().enumerate() {
        for p in d.pairs() {
            writeln!(out, "{row},{},{},{}", d.dimension(), p.birth, p.death).unwrap();
        }
    }
    out
}

pub fn diagrams_from_csv(text: &str, rows: usize, maxscale: f64) -> Result<Vec<PersistenceDiagram>, String> {
    let mut pairs: Vec<Vec<PersistencePair>> = vec![Vec::new(); rows];
    let mut dims = vec![0usize; rows];
    let mut lines = text.lines();
    if lines.next() != Some("row,dimension,birth,death") {
        return Err("missing header".into());
    }
    for (n, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(format!("line {}: expected 4 fields", n + 2));
        }
        let bad = |what: &str| format!("line {}: bad {what}", n + 2);
        let row: usize = f[0].parse().map_err(|_| bad("row"))?;
        if row >= rows {
            return Err(bad("row"));
        }
        dims[row] = f[1].parse().map_err(|_| bad("dimension"))?;
        let birth: f64 = f[2].parse().map_err(|_| bad("birth"))?;
        let death: f64 = f[3].parse().map_err(|_| bad("death"))?;
        pairs[row].push(PersistencePair::new(birth, death));
    }
    pairs
        .into_iter()
        .zip(dims)
        .map(|(p, dim)| PersistenceDiagram::new(dim, p, maxscale).map_err(|e| e.to_string()))
        .collect()
}

/// One line per row, comma separated, no header.
pub fn distances_to_csv(dm: &DistanceMatrix) -> String {
    let mut out = String::new();
    for i in 0..dm.len() {
        let row = dm.row(i);
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn distances_from_csv(text: &str) -> Result<DistanceMatrix, String> {
    let rows = text
        .lines()
        .enumerate()
        .map(|(i, line)| {
            line.split(',')
                .map(|v| v.parse::<f64>().map_err(|_| format!("line {}: bad value {v:?}", i + 1)))
                .collect::<Result<Vec<f64>, String>>()
        })
        .collect::<Result<Vec<_>, String>>()?;
    DistanceMatrix::from_rows(&rows).map_err(|e| e.to_string())
}

/// A cache slot: `<dir>/<tag>.<kind>.csv` plus `<dir>/<tag>.<kind>.manifest`.
#[derive(Debug, Clone)]
pub struct CacheSlot {
    data: PathBuf,
    manifest: PathBuf,
}

/// Outcome of a cache lookup.
#[derive(Debug)]
pub enum Lookup {
    Hit { data: String, manifest: Manifest },
    Missing,
    Stale(String),
}

impl CacheSlot {
    pub fn new(dir: &Path, tag: &str, kind: &str) -> Self {
        Self {
            data: dir.join(format!("{tag}.{kind}.csv")),
            manifest: dir.join(format!("{tag}.{kind}.manifest")),
        }
    }

    pub fn data_path(&self) -> &Path {
        &self.data
    }

    pub fn lookup(&self, hash: &str) -> Lookup {
        let Ok(manifest) = fs::read_to_string(&self.manifest) else {
            return Lookup::Missing;
        };
        let manifest = Manifest::parse(&manifest);
        match manifest.get("config_hash") {
            Some(h) if h == hash => {}
            Some(h) => return Lookup::Stale(format!("config hash {h} != {hash}")),
            None => return Lookup::Stale("manifest has no config hash".into()),
        }
        if manifest.get("version") != Some(VERSION) {
            return Lookup::Stale("written by a different version".into());
        }
        match fs::read_to_string(&self.data) {
            Ok(data) => Lookup::Hit { data, manifest },
            Err(e) => Lookup::Stale(format!("{}: {e}", self.data.display())),
        }
    }

    /// Write data first and the manifest last, so an interrupted write
    /// never leaves a manifest vouching for partial data.
    pub fn store(&self, data: &str, manifest: &Manifest) -> Result<(), PipelineError> {
        if let Some(dir) = self.data.parent() {
            fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
        }
        let _ = fs::remove_file(&self.manifest);
        fs::write(&self.data, data).map_err(|e| PipelineError::io(&self.data, e))?;
        fs::write(&self.manifest, manifest.render()).map_err(|e| PipelineError::io(&self.manifest, e))
    }
}
