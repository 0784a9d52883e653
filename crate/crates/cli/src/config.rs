//! Experiment configuration file.
//!
//! Every knob that changes results lives here with its default, so the
//! effective configuration (recorded in the run manifest) fully determines
//! the artifacts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use topmix::{FitScope, SplitMode, SplitSpec};

use crate::error::PipelineError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymmetryVectorSpec {
    /// `(5, 6, ..., m + 4)`.
    #[default]
    Default,
    Zero,
    Explicit {
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxscaleSpec {
    /// Multiplier on the largest intra-cloud distance over all records.
    #[serde(default = "default_safety")]
    pub safety: f64,
    /// Fixed cap; overrides `safety` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<f64>,
}

fn default_safety() -> f64 {
    1.1
}

impl Default for MaxscaleSpec {
    fn default() -> Self {
        Self {
            safety: default_safety(),
            explicit: None,
        }
    }
}

/// How k is chosen in k-fold mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KSelection {
    /// Use `knn.k`.
    Fixed,
    /// Best pooled cross-validation accuracy over `knn.k_grid`.
    #[default]
    Pooled,
    /// Per-fold choice by inner cross-validation over `knn.k_grid`.
    Nested,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnnSection {
    #[serde(default = "default_k_grid")]
    pub k_grid: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default)]
    pub selection: KSelection,
}

fn default_k_grid() -> Vec<usize> {
    (1..=10).collect()
}

impl Default for KnnSection {
    fn default() -> Self {
        Self {
            k_grid: default_k_grid(),
            k: None,
            selection: KSelection::default(),
        }
    }
}

fn default_delimiter() -> char {
    ','
}

fn default_p() -> f64 {
    1.0
}

fn default_split() -> SplitSpec {
    SplitSpec {
        mode: SplitMode::default_hold_out(),
        seed: 0,
        stratified: false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data_path: PathBuf,
    pub schema_path: PathBuf,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default)]
    pub has_header: bool,
    #[serde(default)]
    pub fit_scope: FitScope,
    /// Wasserstein order.
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub symmetry_vector: SymmetryVectorSpec,
    #[serde(default)]
    pub maxscale: MaxscaleSpec,
    #[serde(default = "default_split")]
    pub split: SplitSpec,
    #[serde(default)]
    pub knn: KnnSection,
    #[serde(default = "default_cache_dir")]
    pub cache_dir: PathBuf,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Worker threads for the diagram and distance stages; 0 uses all cores.
    #[serde(default)]
    pub threads: usize,
}

fn default_cache_dir() -> PathBuf {
    PathBuf::from("cache")
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    /// Defaults for everything except the two input paths.
    pub fn new(data_path: impl Into<PathBuf>, schema_path: impl Into<PathBuf>) -> Self {
        Self {
            data_path: data_path.into(),
            schema_path: schema_path.into(),
            delimiter: default_delimiter(),
            has_header: false,
            fit_scope: FitScope::default(),
            p: default_p(),
            symmetry_vector: SymmetryVectorSpec::default(),
            maxscale: MaxscaleSpec::default(),
            split: default_split(),
            knn: KnnSection::default(),
            cache_dir: default_cache_dir(),
            out_dir: default_out_dir(),
            threads: 0,
        }
    }

    /// Parse a config file; relative paths are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.data_path,
            &mut cfg.schema_path,
            &mut cfg.cache_dir,
            &mut cfg.out_dir,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, PipelineError> {
        let cfg: Self = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |msg: String| Err(PipelineError::Config(msg));
        if !(self.p.is_finite() && self.p >= 1.0) {
            return bad(format!("p must be finite and >= 1, got {}", self.p));
        }
        if !(self.maxscale.safety.is_finite() && self.maxscale.safety >= 1.0) {
            return bad(format!("maxscale safety must be >= 1, got {}", self.maxscale.safety));
        }
        if let Some(m) = self.maxscale.explicit {
            if !(m.is_finite() && m > 0.0) {
                return bad(format!("explicit maxscale must be positive, got {m}"));
            }
        }
        if self.knn.k_grid.is_empty() || self.knn.k_grid.contains(&0) {
            return bad("knn.k_grid must be a non-empty list of positive integers".into());
        }
        if self.knn.k == Some(0) {
            return bad("knn.k must be positive".into());
        }
        if self.knn.selection == KSelection::Fixed && self.knn.k.is_none() {
            return bad("knn.selection = \"fixed\" requires knn.k".into());
        }
        self.split
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(())
    }

    /// Canonical text of every result-determining field. Directories and
    /// thread count are excluded: they never change the artifacts.
    pub fn canonical(&self) -> String {
        let mut c = self.clone();
        c.data_path = PathBuf::new();
        c.schema_path = PathBuf::new();
        c.cache_dir = PathBuf::new();
        c.out_dir = PathBuf::new();
        c.threads = 0;
        toml::to_string(&c).expect("config serializes to TOML")
    }

    /// k-fold k-selection mode after applying `knn.k`.
    pub fn kfold_selection(&self) -> KSelection {
        if self.knn.k.is_some() && self.knn.selection != KSelection::Nested {
            KSelection::Fixed
        } else {
            self.knn.selection
        }
    }

    /// Candidate ks for hold-out validation.
    pub fn hold_out_grid(&self) -> Vec<usize> {
        match self.knn.k {
            Some(k) => vec![k],
            None => self.knn.k_grid.clone(),
        }
    }
}
