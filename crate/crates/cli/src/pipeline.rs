//! End-to-end orchestration: ingest, encode, standardize, symmetry-break,
//! clouds, diagrams, distances, k-NN, report.
//!
//! Standardization is fitted once per "fit": the whole dataset, the
//! hold-out training rows, or the rows outside each cross-validation fold.
//! Diagrams and distances are cached per fit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use topmix::{
    best_k, build_point_cloud, choose_maxscale, default_symmetry_vector, distance_matrix, evaluate_kfold,
    evaluate_kfold_nested, evaluate_split, fit_standardizer, hold_out_split, kfold_assignment, one_hot_encode,
    pairwise_distances, parse_dataset, ranked_neighbors, render_k_table, rips_dim0_diagram, select_k_kfold,
    standardize, symmetry_break, vote, Confusion, DistanceMatrix, EvaluationReport, FeatureMatrix, FitScope,
    HoldOutSplit, KScore, Label, ParseOptions, PersistenceDiagram, PointCloud, Prediction, RawDataset, SchemaSpec,
    SplitMode, SymmetryVector,
};

use crate::cache::{self, CacheSlot, Lookup, Manifest, VERSION};
use crate::config::{ExperimentConfig, KSelection, MaxscaleSpec, SymmetryVectorSpec};
use crate::error::{AtStage, PipelineError, Stage};

type Result<T, E = PipelineError> = std::result::Result<T, E>;

fn timed<T>(stage: Stage, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f();
    info!("stage {stage}: {:.3}s", start.elapsed().as_secs_f64());
    out
}

/// Rows a standardizer is fitted on, with the name used for its caches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fit {
    pub tag: String,
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct DiagramSet {
    pub diagrams: Vec<PersistenceDiagram>,
    pub maxscale: f64,
}

#[derive(Debug, Clone)]
pub struct DistanceSet {
    pub matrix: DistanceMatrix,
    pub maxscale: f64,
}

/// Inputs hashed into the diagram cache key.
#[derive(Serialize)]
struct DiagramKey<'a> {
    version: &'a str,
    data_sha256: &'a str,
    schema: &'a str,
    delimiter: char,
    has_header: bool,
    fit_scope: FitScope,
    fit_rows: String,
    symmetry_vector: &'a SymmetryVectorSpec,
    maxscale: &'a MaxscaleSpec,
}

pub struct Pipeline {
    config: ExperimentConfig,
    dataset: RawDataset,
    encoded: FeatureMatrix,
    labels: Vec<Label>,
    data_sha256: String,
    schema_text: String,
    diagrams_computed: AtomicUsize,
    distances_computed: AtomicUsize,
}

impl Pipeline {
    /// Ingest and encode; everything later is computed on demand.
    pub fn load(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let (dataset, data_sha256, schema_text) = timed(Stage::Ingest, || {
            let schema_src =
                fs::read_to_string(&config.schema_path).map_err(|e| PipelineError::io(&config.schema_path, e))?;
            let schema = SchemaSpec::from_toml_str(&schema_src).at(Stage::Ingest)?;
            let bytes = fs::read(&config.data_path).map_err(|e| PipelineError::io(&config.data_path, e))?;
            let text = String::from_utf8(bytes).map_err(|e| {
                PipelineError::io(
                    &config.data_path,
                    std::io::Error::new(std::io::ErrorKind::InvalidData, e),
                )
            })?;
            let options = ParseOptions {
                delimiter: config.delimiter,
                has_header: config.has_header,
            };
            let dataset = parse_dataset(&text, &schema, options).at(Stage::Ingest)?;
            Ok((dataset, cache::sha256_hex(&text), schema.to_toml_string()))
        })?;
        info!(
            "ingested {} rows, dropped {} with missing values",
            dataset.report.retained_rows,
            dataset.report.dropped_rows()
        );
        let encoded = timed(Stage::Encode, || Ok(one_hot_encode(&dataset)))?;
        let labels = dataset.labels();
        Ok(Self {
            config,
            dataset,
            encoded,
            labels,
            data_sha256,
            schema_text,
            diagrams_computed: AtomicUsize::new(0),
            distances_computed: AtomicUsize::new(0),
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn dataset(&self) -> &RawDataset {
        &self.dataset
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Number of diagram sets computed (not loaded from cache) so far.
    pub fn diagrams_computed(&self) -> usize {
        self.diagrams_computed.load(Ordering::Relaxed)
    }

    /// Number of distance matrices computed (not loaded from cache) so far.
    pub fn distances_computed(&self) -> usize {
        self.distances_computed.load(Ordering::Relaxed)
    }

    /// Hash of every result-determining input: the effective config (paths,
    /// directories and thread count excluded), the data bytes and the schema.
    pub fn config_hash(&self) -> String {
        cache::sha256_hex(format!(
            "{}\n{}\n{}\n{}",
            VERSION,
            self.config.canonical(),
            self.data_sha256,
            self.schema_text
        ))
    }

    fn hold_out(&self) -> Result<HoldOutSplit> {
        hold_out_split(&self.labels, &self.config.split).at(Stage::Knn)
    }

    fn folds(&self) -> Result<Option<Vec<Vec<usize>>>> {
        let spec = &self.config.split;
        match spec.mode {
            SplitMode::KFold { folds } => kfold_assignment(&self.labels, folds, spec.seed, spec.stratified)
                .at(Stage::Knn)
                .map(Some),
            SplitMode::HoldOut { .. } => Ok(None),
        }
    }

    /// One fit for the full dataset or a hold-out split, one per fold for
    /// train-only cross-validation.
    pub fn fits(&self) -> Result<Vec<Fit>> {
        let n = self.labels.len();
        Ok(match (self.config.fit_scope, self.folds()?) {
            (FitScope::FullDataset, _) => vec![Fit {
                tag: "full".into(),
                rows: (0..n).collect(),
            }],
            (FitScope::TrainOnly, None) => vec![Fit {
                tag: "holdout".into(),
                rows: self.hold_out()?.train,
            }],
            (FitScope::TrainOnly, Some(folds)) => folds
                .iter()
                .enumerate()
                .map(|(i, fold)| Fit {
                    tag: format!("fold{i}"),
                    rows: complement(n, fold),
                })
                .collect(),
        })
    }

    fn symmetry_vector(&self) -> Result<SymmetryVector> {
        let m = self.encoded.n_cols();
        match &self.config.symmetry_vector {
            SymmetryVectorSpec::Default => default_symmetry_vector(m).at(Stage::SymmetryBreak),
            SymmetryVectorSpec::Zero => Ok(SymmetryVector::zero(m)),
            SymmetryVectorSpec::Explicit { values } => Ok(SymmetryVector(values.clone())),
        }
    }

    /// Standardized and shifted feature rows for `fit`.
    pub fn features(&self, fit: &Fit) -> Result<FeatureMatrix> {
        let standardized = timed(Stage::Standardize, || {
            let params = fit_standardizer(&self.encoded, self.config.fit_scope, &fit.rows).at(Stage::Standardize)?;
            standardize(&self.encoded, &params).at(Stage::Standardize)
        })?;
        let v = self.symmetry_vector()?;
        timed(Stage::SymmetryBreak, || {
            symmetry_break(&standardized, &v).at(Stage::SymmetryBreak)
        })
    }

    pub fn clouds(&self, fit: &Fit) -> Result<Vec<PointCloud>> {
        let features = self.features(fit)?;
        timed(Stage::Clouds, || {
            (0..features.n_rows())
                .into_par_iter()
                .map(|i| build_point_cloud(features.row(i), i))
                .collect::<topmix::Result<Vec<_>>>()
                .at(Stage::Clouds)
        })
    }

    fn diagram_hash(&self, fit: &Fit) -> String {
        let rows: Vec<String> = fit.rows.iter().map(usize::to_string).collect();
        let key = DiagramKey {
            version: VERSION,
            data_sha256: &self.data_sha256,
            schema: &self.schema_text,
            delimiter: self.config.delimiter,
            has_header: self.config.has_header,
            fit_scope: self.config.fit_scope,
            fit_rows: cache::sha256_hex(rows.join(",")),
            symmetry_vector: &self.config.symmetry_vector,
            maxscale: &self.config.maxscale,
        };
        cache::sha256_hex(toml::to_string(&key).expect("cache key serializes"))
    }

    fn distance_hash(&self, fit: &Fit) -> String {
        cache::sha256_hex(format!("{}\np={}", self.diagram_hash(fit), self.config.p))
    }

    pub fn diagrams(&self, fit: &Fit) -> Result<DiagramSet> {
        let slot = CacheSlot::new(&self.config.cache_dir, &fit.tag, "diagrams");
        let hash = self.diagram_hash(fit);
        match slot.lookup(&hash) {
            Lookup::Hit { data, manifest } => {
                let parsed = manifest
                    .get("maxscale")
                    .and_then(|m| m.parse::<f64>().ok())
                    .ok_or_else(|| "manifest has no maxscale".to_string())
                    .and_then(|ms| cache::diagrams_from_csv(&data, self.labels.len(), ms).map(|d| (d, ms)));
                match parsed {
                    Ok((diagrams, maxscale)) => {
                        info!("diagram cache hit: {}", slot.data_path().display());
                        return Ok(DiagramSet { diagrams, maxscale });
                    }
                    Err(e) => warn!(
                        "diagram cache {} unreadable ({e}); recomputing",
                        slot.data_path().display()
                    ),
                }
            }
            Lookup::Stale(why) => info!(
                "diagram cache {} is stale ({why}); recomputing",
                slot.data_path().display()
            ),
            Lookup::Missing => {}
        }

        let clouds = self.clouds(fit)?;
        let set = timed(Stage::Diagrams, || {
            let distances: Vec<_> = clouds.par_iter().map(pairwise_distances).collect();
            let maxscale = match self.config.maxscale.explicit {
                Some(m) => m,
                None => choose_maxscale(&distances, self.config.maxscale.safety).at(Stage::Diagrams)?,
            };
            let diagrams = distances
                .par_iter()
                .map(|d| rips_dim0_diagram(d, maxscale))
                .collect::<topmix::Result<Vec<_>>>()
                .at(Stage::Diagrams)?;
            Ok(DiagramSet { diagrams, maxscale })
        })?;
        self.diagrams_computed.fetch_add(1, Ordering::Relaxed);
        info!("fit {}: maxscale {}", fit.tag, set.maxscale);
        let mut manifest = Manifest::default();
        manifest
            .set("config_hash", &hash)
            .set("version", VERSION)
            .set("rows", set.diagrams.len())
            .set("maxscale", set.maxscale)
            .set("safety", self.config.maxscale.safety);
        slot.store(&cache::diagrams_to_csv(&set.diagrams), &manifest)?;
        Ok(set)
    }

    pub fn distances(&self, fit: &Fit) -> Result<DistanceSet> {
        let slot = CacheSlot::new(&self.config.cache_dir, &fit.tag, "distances");
        let hash = self.distance_hash(fit);
        match slot.lookup(&hash) {
            Lookup::Hit { data, manifest } => {
                let maxscale = manifest.get("maxscale").and_then(|m| m.parse::<f64>().ok());
                match (cache::distances_from_csv(&data), maxscale) {
                    (Ok(matrix), Some(maxscale)) if matrix.len() == self.labels.len() => {
                        info!("distance cache hit: {}", slot.data_path().display());
                        return Ok(DistanceSet { matrix, maxscale });
                    }
                    _ => warn!("distance cache {} unreadable; recomputing", slot.data_path().display()),
                }
            }
            Lookup::Stale(why) => info!(
                "distance cache {} is stale ({why}); recomputing",
                slot.data_path().display()
            ),
            Lookup::Missing => {}
        }

        let set = self.diagrams(fit)?;
        let matrix = timed(Stage::Distances, || {
            distance_matrix(&set.diagrams, self.config.p).at(Stage::Distances)
        })?;
        self.distances_computed.fetch_add(1, Ordering::Relaxed);
        let mut manifest = Manifest::default();
        manifest
            .set("config_hash", &hash)
            .set("version", VERSION)
            .set("rows", matrix.len())
            .set("maxscale", set.maxscale)
            .set("safety", self.config.maxscale.safety)
            .set("p", self.config.p);
        slot.store(&cache::distances_to_csv(&matrix), &manifest)?;
        Ok(DistanceSet {
            matrix,
            maxscale: set.maxscale,
        })
    }

    /// Run the configured experiment.
    pub fn classify(&self) -> Result<Outcome> {
        let fits = self.fits()?;
        let mut maxscales = Vec::new();
        let mut matrices = Vec::new();
        for fit in &fits {
            let set = self.distances(fit)?;
            maxscales.push((fit.tag.clone(), set.maxscale));
            matrices.push(set.matrix);
        }
        let cfg = &self.config;
        let spec = &cfg.split;
        let (report, scores, kind) = timed(Stage::Knn, || match spec.mode {
            SplitMode::HoldOut { .. } => {
                let r = evaluate_split(&matrices[0], &self.labels, spec, &cfg.hold_out_grid()).at(Stage::Knn)?;
                Ok((r.test, r.validation, OutcomeKind::HoldOut(r.split)))
            }
            SplitMode::KFold { folds } => {
                let selection = cfg.kfold_selection();
                let kind = OutcomeKind::KFold { folds, selection };
                if cfg.fit_scope == FitScope::TrainOnly {
                    let (r, s) = self.kfold_per_fit(&matrices, selection)?;
                    return Ok((r, s, kind));
                }
                let dm = &matrices[0];
                let (strat, seed) = (spec.stratified, spec.seed);
                match selection {
                    KSelection::Fixed => {
                        let k = cfg.knn.k.expect("validated");
                        let r = evaluate_kfold(dm, &self.labels, folds, k, seed, strat).at(Stage::Knn)?;
                        Ok((r, Vec::new(), kind))
                    }
                    KSelection::Pooled => {
                        let (r, s) =
                            select_k_kfold(dm, &self.labels, folds, &cfg.knn.k_grid, seed, strat).at(Stage::Knn)?;
                        Ok((r, s, kind))
                    }
                    KSelection::Nested => {
                        let r = evaluate_kfold_nested(dm, &self.labels, folds, &cfg.knn.k_grid, seed, strat)
                            .at(Stage::Knn)?;
                        Ok((r, Vec::new(), kind))
                    }
                }
            }
        })?;
        Ok(Outcome {
            report,
            scores,
            kind,
            maxscales,
        })
    }

    /// Cross-validation where fold `i` is classified with the distances of
    /// fit `i` (standardizer fitted on the rows outside the fold).
    fn kfold_per_fit(
        &self,
        matrices: &[DistanceMatrix],
        selection: KSelection,
    ) -> Result<(EvaluationReport, Vec<KScore>)> {
        let ks = match selection {
            KSelection::Fixed => vec![self.config.knn.k.expect("validated")],
            KSelection::Pooled => self.config.knn.k_grid.clone(),
            KSelection::Nested => {
                return Err(PipelineError::Config(
                    "nested k selection is not supported with fit_scope = \"train_only\"".into(),
                ))
            }
        };
        let folds = self.folds()?.expect("k-fold mode");
        let n = self.labels.len();
        let mut preds: Vec<Vec<Prediction>> = vec![Vec::new(); ks.len()];
        let mut per_fold: Vec<Vec<Confusion>> = vec![Vec::new(); ks.len()];
        for (fold, dm) in folds.iter().zip(matrices) {
            let candidates = complement(n, fold);
            if let Some(&k) = ks.iter().find(|&&k| k > candidates.len()) {
                return Err(topmix::Error::Evaluation(format!(
                    "k = {k} exceeds the {} rows outside a fold",
                    candidates.len()
                )))
                .at(Stage::Knn);
            }
            let ranked = fold
                .par_iter()
                .map(|&q| ranked_neighbors(q, &candidates, dm).map(|r| (q, r)))
                .collect::<topmix::Result<Vec<_>>>()
                .at(Stage::Knn)?;
            for (ki, &k) in ks.iter().enumerate() {
                let mut confusion = Confusion::default();
                for (q, r) in &ranked {
                    let p = Prediction {
                        row: *q,
                        actual: self.labels[*q],
                        predicted: vote(&r[..k], &self.labels),
                    };
                    confusion.record(p.actual, p.predicted);
                    preds[ki].push(p);
                }
                per_fold[ki].push(confusion);
            }
        }
        let scores = ks
            .iter()
            .zip(&preds)
            .map(|(&k, p)| KScore::from_predictions(k, p))
            .collect::<topmix::Result<Vec<_>>>()
            .at(Stage::Knn)?;
        let chosen = best_k(&scores);
        let idx = ks.iter().position(|&k| k == chosen).unwrap();
        let seed = self.config.split.seed;
        let report =
            EvaluationReport::from_predictions(chosen, seed, preds.swap_remove(idx), per_fold.swap_remove(idx))
                .at(Stage::Knn)?;
        let scores = if selection == KSelection::Fixed {
            Vec::new()
        } else {
            scores
        };
        Ok((report, scores))
    }

    /// A row's cloud, diagram and nearest training rows, as text.
    ///
    /// Rows are numbered from 0 among the rows kept after dropping records
    /// with missing values. Training rows are the hold-out training split,
    /// or the rows outside the row's fold in cross-validation.
    pub fn inspect(&self, row: usize, k: usize) -> Result<String> {
        let n = self.labels.len();
        if row >= n {
            return Err(PipelineError::Config(format!(
                "row {row} out of range (dataset has {n} rows)"
            )));
        }
        if k == 0 {
            return Err(PipelineError::Config("k must be positive".into()));
        }
        let fits = self.fits()?;
        let (role, candidates, fit) = match self.folds()? {
            None => {
                let split = self.hold_out()?;
                let role = if split.train.contains(&row) {
                    "train"
                } else if split.validation.contains(&row) {
                    "validation"
                } else {
                    "test"
                };
                let candidates: Vec<usize> = split.train.into_iter().filter(|&r| r != row).collect();
                (role.to_string(), candidates, &fits[0])
            }
            Some(folds) => {
                let i = folds
                    .iter()
                    .position(|f| f.contains(&row))
                    .expect("every row has a fold");
                let fit = if fits.len() == 1 { &fits[0] } else { &fits[i] };
                (format!("fold {i}"), complement(n, &folds[i]), fit)
            }
        };
        let features = self.features(fit)?;
        let cloud = build_point_cloud(features.row(row), row).at(Stage::Clouds)?;
        let diagrams = self.diagrams(fit)?;
        let distances = self.distances(fit)?;
        let ranked = ranked_neighbors(row, &candidates, &distances.matrix).at(Stage::Knn)?;

        let mut out = String::new();
        writeln!(out, "row {row} label {} ({role})", self.labels[row]).unwrap();
        writeln!(
            out,
            "cloud: {} points in dimension {}",
            cloud.len(),
            cloud.ambient_dim()
        )
        .unwrap();
        out.push_str(&cloud.to_delimited(','));
        let d = &diagrams.diagrams[row];
        writeln!(out, "diagram: dimension {}, maxscale {}", d.dimension(), d.maxscale()).unwrap();
        writeln!(out, "birth,death").unwrap();
        for p in d.pairs() {
            writeln!(out, "{},{}", p.birth, p.death).unwrap();
        }
        let shown = k.min(ranked.len());
        writeln!(out, "nearest {shown} of {} training rows:", ranked.len()).unwrap();
        writeln!(out, "rank,row,label,distance").unwrap();
        for (rank, (r, dist)) in ranked.iter().take(shown).enumerate() {
            writeln!(out, "{},{r},{},{dist}", rank + 1, self.labels[*r]).unwrap();
        }
        writeln!(out, "vote: {}", vote(&ranked[..shown], &self.labels)).unwrap();
        Ok(out)
    }

    /// Run manifest: everything needed to reproduce the artifacts.
    pub fn manifest(&self, outcome: Option<&Outcome>) -> Manifest {
        let cfg = &self.config;
        let mut m = Manifest::default();
        m.set("version", VERSION)
            .set("config_hash", self.config_hash())
            .set("data_sha256", &self.data_sha256)
            .set("rows", self.dataset.report.retained_rows)
            .set("dropped_rows", self.dataset.report.dropped_rows())
            .set("seed", cfg.split.seed)
            .set("p", cfg.p)
            .set("safety", cfg.maxscale.safety);
        if let Some(o) = outcome {
            for (tag, ms) in &o.maxscales {
                m.set(&format!("maxscale.{tag}"), ms);
            }
            m.set("k", o.report.k);
        }
        m
    }
}

fn complement(n: usize, excluded: &[usize]) -> Vec<usize> {
    let mut keep = vec![true; n];
    for &r in excluded {
        keep[r] = false;
    }
    (0..n).filter(|&r| keep[r]).collect()
}

#[derive(Debug, Clone)]
pub enum OutcomeKind {
    HoldOut(HoldOutSplit),
    KFold { folds: usize, selection: KSelection },
}

/// Result of `classify`.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// Test-split report (hold-out) or pooled cross-validation report.
    pub report: EvaluationReport,
    /// Validation scores per k (hold-out) or pooled scores per k (k-fold
    /// with pooled selection); empty otherwise.
    pub scores: Vec<KScore>,
    pub kind: OutcomeKind,
    /// Filtration cap used by each fit.
    pub maxscales: Vec<(String, f64)>,
}

impl Outcome {
    pub fn render_report(&self, pipeline: &Pipeline) -> String {
        let mut out = String::new();
        let r = &pipeline.dataset.report;
        writeln!(out, "rows: {} kept, {} dropped", r.retained_rows, r.dropped_rows()).unwrap();
        match &self.kind {
            OutcomeKind::HoldOut(split) => {
                writeln!(
                    out,
                    "hold-out split (seed {}): train {}, validation {}, test {}",
                    self.report.seed,
                    split.train.len(),
                    split.validation.len(),
                    split.test.len()
                )
                .unwrap();
                out.push_str("\nvalidation\n");
                out.push_str(&render_k_table(&self.scores));
                writeln!(out, "\ntest (k = {})", self.report.k).unwrap();
            }
            OutcomeKind::KFold { folds, selection } => {
                let sel = match selection {
                    KSelection::Fixed => "fixed k",
                    KSelection::Pooled => "pooled selection",
                    KSelection::Nested => "nested selection",
                };
                writeln!(out, "{folds}-fold cross-validation (seed {}), {sel}", self.report.seed).unwrap();
                if !self.scores.is_empty() {
                    out.push('\n');
                    out.push_str(&render_k_table(&self.scores));
                }
                writeln!(out, "\npooled (k = {})", self.report.k).unwrap();
            }
        }
        out.push_str(&self.report.render_table());
        out
    }

    pub fn render_key_values(&self) -> String {
        let mut out = String::new();
        match &self.kind {
            OutcomeKind::HoldOut(_) => out.push_str("mode=hold_out\n"),
            OutcomeKind::KFold { folds, .. } => writeln!(out, "mode=k_fold\nfolds={folds}").unwrap(),
        }
        let prefix = match self.kind {
            OutcomeKind::HoldOut(_) => "test.",
            OutcomeKind::KFold { .. } => "cv.",
        };
        out.push_str(&self.report.to_key_values(prefix));
        for s in &self.scores {
            writeln!(
                out,
                "selection.k{}.accuracy={}",
                s.k,
                topmix::evaluation::fmt_percent(Some(s.metrics.accuracy))
            )
            .unwrap();
        }
        out
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| PipelineError::io(&path, e))?;
    Ok(path)
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))?;
    pool.install(f)
}

fn artifact_name(kind: &str, fit: &Fit, fits: usize) -> String {
    if fits == 1 {
        format!("{kind}.csv")
    } else {
        format!("{kind}.{}.csv", fit.tag)
    }
}

/// `diagrams` subcommand: write every row's diagram to the output directory.
pub fn run_diagrams(config: ExperimentConfig) -> Result<Vec<PathBuf>> {
    let threads = config.threads;
    in_pool(threads, move || {
        let p = Pipeline::load(config)?;
        let fits = p.fits()?;
        let mut written = Vec::new();
        for fit in &fits {
            let set = p.diagrams(fit)?;
            let name = artifact_name("diagrams", fit, fits.len());
            written.push(write(&p.config.out_dir, &name, &cache::diagrams_to_csv(&set.diagrams))?);
        }
        Ok(written)
    })
}

/// `distances` subcommand: write the distance matrix to the output directory.
pub fn run_distances(config: ExperimentConfig) -> Result<Vec<PathBuf>> {
    let threads = config.threads;
    in_pool(threads, move || {
        let p = Pipeline::load(config)?;
        let fits = p.fits()?;
        let mut written = Vec::new();
        for fit in &fits {
            let set = p.distances(fit)?;
            let name = artifact_name("distances", fit, fits.len());
            written.push(write(&p.config.out_dir, &name, &cache::distances_to_csv(&set.matrix))?);
        }
        Ok(written)
    })
}

/// Artifacts and bookkeeping from a `classify` run.
#[derive(Debug, Clone)]
pub struct ClassifyRun {
    pub outcome: Outcome,
    pub report_text: String,
    pub diagrams_computed: usize,
    pub distances_computed: usize,
}

/// `classify` subcommand: full experiment. Writes `report.txt`,
/// `report.kv`, `predictions.csv`, `manifest.txt` and `config.toml`.
pub fn run_classify(config: ExperimentConfig) -> Result<ClassifyRun> {
    let threads = config.threads;
    in_pool(threads, move || {
        let p = Pipeline::load(config)?;
        let outcome = p.classify()?;
        timed(Stage::Report, || {
            let dir = &p.config.out_dir;
            let report_text = outcome.render_report(&p);
            write(dir, "report.txt", &report_text)?;
            write(dir, "report.kv", &outcome.render_key_values())?;
            write(dir, "predictions.csv", &outcome.report.predictions_csv())?;
            write(dir, "manifest.txt", &p.manifest(Some(&outcome)).render())?;
            write(dir, "config.toml", &p.config.canonical())?;
            Ok(ClassifyRun {
                report_text,
                diagrams_computed: p.diagrams_computed(),
                distances_computed: p.distances_computed(),
                outcome,
            })
        })
    })
}

/// `inspect` subcommand.
pub fn run_inspect(config: ExperimentConfig, row: usize, k: usize) -> Result<String> {
    let threads = config.threads;
    in_pool(threads, move || Pipeline::load(config)?.inspect(row, k))
}
