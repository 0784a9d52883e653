//! Experiment harness: seeded splits, k selection, cross-validation and
//! binary classification metrics.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::ingestion::Label;
use crate::knn::{ranked_neighbors, vote};
use crate::metric::DistanceMatrix;

/// Confusion counts with class 1 as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn record(&mut self, actual: Label, predicted: Label) {
        match (actual.is_positive(), predicted.is_positive()) {
            (true, true) => self.tp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn merge(&mut self, other: &Confusion) {
        self.tp += other.tp;
        self.tn += other.tn;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

/// Metrics in percent at full precision. `None` marks a ratio whose
/// denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    /// Indexed by class label.
    pub precision: [Option<f64>; 2],
    pub f1: [Option<f64>; 2],
}

fn percent(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

pub fn compute_metrics(c: &Confusion) -> Result<Metrics> {
    contract!(c.total() > 0, "metrics need at least one prediction");
    Ok(Metrics {
        accuracy: 100.0 * (c.tp + c.tn) as f64 / c.total() as f64,
        sensitivity: percent(c.tp, c.tp + c.fn_),
        specificity: percent(c.tn, c.tn + c.fp),
        precision: [percent(c.tn, c.tn + c.fn_), percent(c.tp, c.tp + c.fp)],
        f1: [
            percent(2 * c.tn, 2 * c.tn + c.fn_ + c.fp),
            percent(2 * c.tp, 2 * c.tp + c.fp + c.fn_),
        ],
    })
}

/// Two-decimal presentation; not-applicable ratios print as `n/a`.
pub fn fmt_percent(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.2}"),
        None => "n/a".to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SplitMode {
    HoldOut { train: f64, validation: f64, test: f64 },
    KFold { folds: usize },
}

impl SplitMode {
    pub fn default_hold_out() -> Self {
        SplitMode::HoldOut {
            train: 0.6,
            validation: 0.2,
            test: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    #[serde(flatten)]
    pub mode: SplitMode,
    pub seed: u64,
    #[serde(default)]
    pub stratified: bool,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        match self.mode {
            SplitMode::HoldOut {
                train,
                validation,
                test,
            } => {
                contract!(
                    [train, validation, test].iter().all(|f| f.is_finite() && *f >= 0.0),
                    "hold-out fractions must be nonnegative"
                );
                contract!(
                    (train + validation + test - 1.0).abs() < 1e-9,
                    "hold-out fractions must sum to 1"
                );
                contract!(train > 0.0, "training fraction must be positive");
            }
            SplitMode::KFold { folds } => contract!(folds >= 2, "k-fold needs at least 2 folds"),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoldOutSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

fn shuffled(rows: impl IntoIterator<Item = usize>, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut v: Vec<usize> = rows.into_iter().collect();
    v.shuffle(rng);
    v
}

fn cut(rows: &[usize], validation: f64, test: f64) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let n = rows.len();
    let n_val = ((validation * n as f64).round() as usize).min(n);
    let n_test = ((test * n as f64).round() as usize).min(n - n_val);
    let n_train = n - n_val - n_test;
    (
        rows[..n_train].to_vec(),
        rows[n_train..n_train + n_val].to_vec(),
        rows[n_train + n_val..].to_vec(),
    )
}

/// Seeded shuffle, then validation and test take `round(fraction * n)`
/// rows each and training keeps the remainder. Each part is returned in
/// ascending row order.
pub fn hold_out_split(labels: &[Label], spec: &SplitSpec) -> Result<HoldOutSplit> {
    spec.validate()?;
    let SplitMode::HoldOut { validation, test, .. } = spec.mode else {
        return Err(Error::Contract("hold_out_split needs a hold-out split spec".into()));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut split = HoldOutSplit {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
    };
    let groups: Vec<Vec<usize>> = if spec.stratified {
        [Label::NEGATIVE, Label::POSITIVE]
            .iter()
            .map(|&l| (0..labels.len()).filter(|&i| labels[i] == l).collect())
            .collect()
    } else {
        vec![(0..labels.len()).collect()]
    };
    for group in groups {
        let rows = shuffled(group, &mut rng);
        let (tr, va, te) = cut(&rows, validation, test);
        split.train.extend(tr);
        split.validation.extend(va);
        split.test.extend(te);
    }
    split.train.sort_unstable();
    split.validation.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

/// Seeded fold assignment: shuffled position modulo `folds`. Stratified
/// assignment deals each class round-robin so class counts per fold differ
/// by at most one.
pub fn kfold_assignment(labels: &[Label], folds: usize, seed: u64, stratified: bool) -> Result<Vec<Vec<usize>>> {
    contract!(folds >= 2, "k-fold needs at least 2 folds");
    contract!(folds <= labels.len(), "{folds} folds for {} rows", labels.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = shuffled(0..labels.len(), &mut rng);
    if stratified {
        order.sort_by_key(|&r| labels[r]);
    }
    let mut out = vec![Vec::new(); folds];
    for (pos, row) in order.into_iter().enumerate() {
        out[pos % folds].push(row);
    }
    for f in &mut out {
        f.sort_unstable();
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prediction {
    pub row: usize,
    pub actual: Label,
    pub predicted: Label,
}

/// Predict every query against `candidates` for each k in `ks`. Returns
/// one prediction list per k, in query order.
fn predict_many(
    queries: &[usize],
    candidates: &[usize],
    distances: &DistanceMatrix,
    labels: &[Label],
    ks: &[usize],
) -> Result<Vec<Vec<Prediction>>> {
    let max_k = ks.iter().copied().max().unwrap_or(0);
    contract!(
        candidates.len() >= max_k,
        "k = {max_k} exceeds the {} available candidates",
        candidates.len()
    );
    let per_query = queries
        .par_iter()
        .map(|&q| {
            let ranked = ranked_neighbors(q, candidates, distances)?;
            Ok(ks.iter().map(|&k| vote(&ranked[..k], labels)).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<Vec<Label>>>>()?;
    Ok((0..ks.len())
        .map(|ki| {
            queries
                .iter()
                .zip(&per_query)
                .map(|(&row, votes)| Prediction {
                    row,
                    actual: labels[row],
                    predicted: votes[ki],
                })
                .collect()
        })
        .collect())
}

fn confusion_of(predictions: &[Prediction]) -> Confusion {
    let mut c = Confusion::default();
    for p in predictions {
        c.record(p.actual, p.predicted);
    }
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub k: usize,
    pub seed: u64,
    pub confusion: Confusion,
    pub metrics: Metrics,
    pub predictions: Vec<Prediction>,
    /// Per-fold confusion counts (cross-validation only).
    pub folds: Vec<Confusion>,
    /// Per-fold k chosen by nested selection (nested cross-validation only).
    pub fold_k: Vec<usize>,
}

impl EvaluationReport {
    /// Report over pooled predictions; they are sorted by row.
    pub fn from_predictions(
        k: usize,
        seed: u64,
        mut predictions: Vec<Prediction>,
        folds: Vec<Confusion>,
    ) -> Result<Self> {
        predictions.sort_by_key(|p| p.row);
        let confusion = confusion_of(&predictions);
        Ok(Self {
            k,
            seed,
            metrics: compute_metrics(&confusion)?,
            confusion,
            predictions,
            folds,
            fold_k: Vec::new(),
        })
    }

    /// `name=value` lines, one metric per line.
    pub fn to_key_values(&self, prefix: &str) -> String {
        let m = &self.metrics;
        let c = &self.confusion;
        let mut out = String::new();
        let mut kv = |name: &str, value: String| writeln!(out, "{prefix}{name}={value}").unwrap();
        kv("k", self.k.to_string());
        kv("seed", self.seed.to_string());
        kv("total", c.total().to_string());
        kv("tp", c.tp.to_string());
        kv("tn", c.tn.to_string());
        kv("fp", c.fp.to_string());
        kv("fn", c.fn_.to_string());
        kv("accuracy", fmt_percent(Some(m.accuracy)));
        kv("sensitivity", fmt_percent(m.sensitivity));
        kv("specificity", fmt_percent(m.specificity));
        kv("precision_0", fmt_percent(m.precision[0]));
        kv("precision_1", fmt_percent(m.precision[1]));
        kv("f1_0", fmt_percent(m.f1[0]));
        kv("f1_1", fmt_percent(m.f1[1]));
        for (i, f) in self.folds.iter().enumerate() {
            let acc = compute_metrics(f).map(|m| m.accuracy).ok();
            kv(&format!("fold_{i}.accuracy"), fmt_percent(acc));
        }
        for (i, k) in self.fold_k.iter().enumerate() {
            kv(&format!("fold_{i}.k"), k.to_string());
        }
        out
    }

    pub fn render_table(&self) -> String {
        let m = &self.metrics;
        let mut out = String::new();
        writeln!(
            out,
            "{:>9} {:>12} {:>12} {:>12} {:>12} {:>9} {:>9}",
            "Accuracy", "Sensitivity", "Specificity", "Prec(0)", "Prec(1)", "F1(0)", "F1(1)"
        )
        .unwrap();
        writeln!(
            out,
            "{:>9} {:>12} {:>12} {:>12} {:>12} {:>9} {:>9}",
            fmt_percent(Some(m.accuracy)),
            fmt_percent(m.sensitivity),
            fmt_percent(m.specificity),
            fmt_percent(m.precision[0]),
            fmt_percent(m.precision[1]),
            fmt_percent(m.f1[0]),
            fmt_percent(m.f1[1]),
        )
        .unwrap();
        let c = &self.confusion;
        writeln!(out, "k={} TP={} TN={} FP={} FN={}", self.k, c.tp, c.tn, c.fp, c.fn_).unwrap();
        out
    }

    /// `row,actual,predicted` lines with a header.
    pub fn predictions_csv(&self) -> String {
        let mut out = String::from("row,actual,predicted\n");
        for p in &self.predictions {
            writeln!(out, "{},{},{}", p.row, p.actual, p.predicted).unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KScore {
    pub k: usize,
    pub confusion: Confusion,
    pub metrics: Metrics,
}

impl KScore {
    pub fn from_predictions(k: usize, predictions: &[Prediction]) -> Result<Self> {
        let confusion = confusion_of(predictions);
        Ok(Self {
            k,
            confusion,
            metrics: compute_metrics(&confusion)?,
        })
    }
}

/// Highest accuracy, ties to the smallest k.
pub fn best_k(scores: &[KScore]) -> usize {
    let mut best = &scores[0];
    for s in &scores[1..] {
        if s.metrics.accuracy > best.metrics.accuracy || (s.metrics.accuracy == best.metrics.accuracy && s.k < best.k) {
            best = s;
        }
    }
    best.k
}

fn check_grid(k_grid: &[usize]) -> Result<()> {
    contract!(!k_grid.is_empty(), "k grid is empty");
    contract!(k_grid.iter().all(|&k| k >= 1), "every k must be at least 1");
    Ok(())
}

fn check_inputs(distances: &DistanceMatrix, labels: &[Label]) -> Result<()> {
    contract!(
        labels.len() == distances.len(),
        "one label per distance-matrix row required"
    );
    if !(labels.contains(&Label::NEGATIVE) && labels.contains(&Label::POSITIVE)) {
        return Err(Error::Evaluation("dataset must contain both classes".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoldOutReport {
    pub split: HoldOutSplit,
    pub chosen_k: usize,
    pub validation: Vec<KScore>,
    pub test: EvaluationReport,
}

impl HoldOutReport {
    pub fn render_validation_table(&self) -> String {
        render_k_table(&self.validation)
    }
}

/// One column per k: accuracy, sensitivity and specificity.
pub fn render_k_table(scores: &[KScore]) -> String {
    let mut out = String::new();
    let mut row = |name: &str, f: &dyn Fn(&KScore) -> String| {
        write!(out, "{name:<16}").unwrap();
        for s in scores {
            write!(out, " {:>7}", f(s)).unwrap();
        }
        out.push('\n');
    };
    row("k", &|s| s.k.to_string());
    row("Accuracy (%)", &|s| fmt_percent(Some(s.metrics.accuracy)));
    row("Sensitivity (%)", &|s| fmt_percent(s.metrics.sensitivity));
    row("Specificity (%)", &|s| fmt_percent(s.metrics.specificity));
    out
}

/// Classify the validation rows against the training rows for each k in
/// `k_grid`, pick the k with the best validation accuracy, then classify
/// the test rows against the training rows with it.
pub fn evaluate_split(
    distances: &DistanceMatrix,
    labels: &[Label],
    spec: &SplitSpec,
    k_grid: &[usize],
) -> Result<HoldOutReport> {
    check_inputs(distances, labels)?;
    check_grid(k_grid)?;
    let split = hold_out_split(labels, spec)?;
    for class in [Label::NEGATIVE, Label::POSITIVE] {
        if !split.train.iter().any(|&r| labels[r] == class) {
            return Err(Error::Evaluation(format!(
                "training split has no rows of class {class}"
            )));
        }
    }
    if split.validation.is_empty() || split.test.is_empty() {
        return Err(Error::Evaluation("validation and test splits must be non-empty".into()));
    }
    if let Some(&k) = k_grid.iter().find(|&&k| k > split.train.len()) {
        return Err(Error::Evaluation(format!(
            "k = {k} exceeds the {} training rows",
            split.train.len()
        )));
    }

    let per_k = predict_many(&split.validation, &split.train, distances, labels, k_grid)?;
    let validation = k_grid
        .iter()
        .zip(&per_k)
        .map(|(&k, preds)| KScore::from_predictions(k, preds))
        .collect::<Result<Vec<_>>>()?;
    let chosen_k = best_k(&validation);
    let test_preds = predict_many(&split.test, &split.train, distances, labels, &[chosen_k])?
        .pop()
        .unwrap();
    let test = EvaluationReport::from_predictions(chosen_k, spec.seed, test_preds, Vec::new())?;
    Ok(HoldOutReport {
        split,
        chosen_k,
        validation,
        test,
    })
}

fn complement(n: usize, excluded: &[usize]) -> Vec<usize> {
    let mut mask = vec![true; n];
    for &r in excluded {
        mask[r] = false;
    }
    (0..n).filter(|&r| mask[r]).collect()
}

/// Pooled cross-validation over a fixed fold assignment, for every k in
/// `ks`. Each row is classified exactly once, by the rows of other folds.
fn cross_validate(
    distances: &DistanceMatrix,
    labels: &[Label],
    folds: &[Vec<usize>],
    ks: &[usize],
) -> Result<Vec<(Vec<Prediction>, Vec<Confusion>)>> {
    let mut out = vec![(Vec::new(), Vec::new()); ks.len()];
    for fold in folds {
        let candidates = complement(labels.len(), fold);
        if let Some(&k) = ks.iter().find(|&&k| k > candidates.len()) {
            return Err(Error::Evaluation(format!(
                "k = {k} exceeds the {} rows outside a fold",
                candidates.len()
            )));
        }
        let per_k = predict_many(fold, &candidates, distances, labels, ks)?;
        for (slot, preds) in out.iter_mut().zip(per_k) {
            slot.1.push(confusion_of(&preds));
            slot.0.extend(preds);
        }
    }
    Ok(out)
}

/// Seeded k-fold cross-validation with a fixed k and pooled confusion counts.
pub fn evaluate_kfold(
    distances: &DistanceMatrix,
    labels: &[Label],
    folds: usize,
    k: usize,
    seed: u64,
    stratified: bool,
) -> Result<EvaluationReport> {
    check_inputs(distances, labels)?;
    check_grid(&[k])?;
    let assignment = kfold_assignment(labels, folds, seed, stratified)?;
    let (preds, per_fold) = cross_validate(distances, labels, &assignment, &[k])?.pop().unwrap();
    EvaluationReport::from_predictions(k, seed, preds, per_fold)
}

/// Pooled-score k selection: run the same fold assignment for every k in
/// `k_grid` and keep the most accurate (ties to smaller k). Returns the
/// report for the chosen k together with the score table.
pub fn select_k_kfold(
    distances: &DistanceMatrix,
    labels: &[Label],
    folds: usize,
    k_grid: &[usize],
    seed: u64,
    stratified: bool,
) -> Result<(EvaluationReport, Vec<KScore>)> {
    check_inputs(distances, labels)?;
    check_grid(k_grid)?;
    let assignment = kfold_assignment(labels, folds, seed, stratified)?;
    let results = cross_validate(distances, labels, &assignment, k_grid)?;
    let scores = k_grid
        .iter()
        .zip(&results)
        .map(|(&k, (preds, _))| KScore::from_predictions(k, preds))
        .collect::<Result<Vec<_>>>()?;
    let chosen = best_k(&scores);
    let idx = k_grid.iter().position(|&k| k == chosen).unwrap();
    let (preds, per_fold) = results.into_iter().nth(idx).unwrap();
    Ok((
        EvaluationReport::from_predictions(chosen, seed, preds, per_fold)?,
        scores,
    ))
}

/// Nested cross-validation: for each outer fold, k is chosen by
/// cross-validation over the remaining folds, then that fold is classified
/// against all remaining rows. The reported `k` is the most frequent
/// per-fold choice (ties to smaller k); `fold_k` lists every choice.
pub fn evaluate_kfold_nested(
    distances: &DistanceMatrix,
    labels: &[Label],
    folds: usize,
    k_grid: &[usize],
    seed: u64,
    stratified: bool,
) -> Result<EvaluationReport> {
    check_inputs(distances, labels)?;
    check_grid(k_grid)?;
    contract!(folds >= 3, "nested cross-validation needs at least 3 folds");
    let assignment = kfold_assignment(labels, folds, seed, stratified)?;
    let mut predictions = Vec::new();
    let mut per_fold = Vec::new();
    let mut fold_k = Vec::new();
    for (i, fold) in assignment.iter().enumerate() {
        let inner: Vec<Vec<usize>> = assignment
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, f)| f.clone())
            .collect();
        // Inner candidates exclude the outer fold entirely.
        let outer_rows: Vec<usize> = inner.iter().flatten().copied().collect();
        let mut inner_scores = Vec::with_capacity(k_grid.len());
        let inner_results = cross_validate_within(distances, labels, &inner, &outer_rows, k_grid)?;
        for (&k, preds) in k_grid.iter().zip(&inner_results) {
            inner_scores.push(KScore::from_predictions(k, preds)?);
        }
        let k = best_k(&inner_scores);
        let preds = predict_many(fold, &outer_rows, distances, labels, &[k])?.pop().unwrap();
        per_fold.push(confusion_of(&preds));
        predictions.extend(preds);
        fold_k.push(k);
    }
    let mut counts: Vec<(usize, usize)> = k_grid
        .iter()
        .map(|&k| (k, fold_k.iter().filter(|&&x| x == k).count()))
        .collect();
    counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut report = EvaluationReport::from_predictions(counts[0].0, seed, predictions, per_fold)?;
    report.fold_k = fold_k;
    Ok(report)
}

/// Like `cross_validate`, but candidates are restricted to `universe`.
fn cross_validate_within(
    distances: &DistanceMatrix,
    labels: &[Label],
    folds: &[Vec<usize>],
    universe: &[usize],
    ks: &[usize],
) -> Result<Vec<Vec<Prediction>>> {
    let mut out = vec![Vec::new(); ks.len()];
    for fold in folds {
        let candidates: Vec<usize> = universe
            .iter()
            .copied()
            .filter(|r| fold.binary_search(r).is_err())
            .collect();
        if let Some(&k) = ks.iter().find(|&&k| k > candidates.len()) {
            return Err(Error::Evaluation(format!(
                "k = {k} exceeds the {} inner candidate rows",
                candidates.len()
            )));
        }
        for (slot, preds) in out
            .iter_mut()
            .zip(predict_many(fold, &candidates, distances, labels, ks)?)
        {
            slot.extend(preds);
        }
    }
    Ok(out)
}
