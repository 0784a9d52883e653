//! One-hot encoding, standardization and symmetry breaking.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::ingestion::{AttributeKind, Label, RawDataset, RawValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Encoded,
    Standardized,
    SymmetryBroken,
}

/// Row-major `n x m` table of finite reals with one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Vec<f64>,
    n_rows: usize,
    column_names: Vec<String>,
    labels: Vec<Label>,
    stage: Stage,
}

impl FeatureMatrix {
    pub fn from_rows(rows: &[Vec<f64>], column_names: Vec<String>, labels: Vec<Label>, stage: Stage) -> Result<Self> {
        let m = column_names.len();
        contract!(
            rows.len() == labels.len(),
            "{} rows but {} labels",
            rows.len(),
            labels.len()
        );
        let mut values = Vec::with_capacity(rows.len() * m);
        for (i, row) in rows.iter().enumerate() {
            contract!(row.len() == m, "row {i} has {} values, expected {m}", row.len());
            contract!(row.iter().all(|v| v.is_finite()), "row {i} has a non-finite value");
            values.extend_from_slice(row);
        }
        Ok(Self {
            values,
            n_rows: rows.len(),
            column_names,
            labels,
            stage,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.n_cols();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols() + col]
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    /// Delimited text with a header row; the label is the last column.
    pub fn to_delimited(&self, delimiter: char) -> String {
        let mut out = String::new();
        for name in &self.column_names {
            out.push_str(name);
            out.push(delimiter);
        }
        out.push_str("label\n");
        for (row, label) in self.rows().zip(&self.labels) {
            for v in row {
                write!(out, "{v}{delimiter}").unwrap();
            }
            writeln!(out, "{label}").unwrap();
        }
        out
    }

    fn map_values(&self, stage: Stage, f: impl Fn(usize, f64) -> f64) -> Self {
        let m = self.n_cols();
        let values = self.values.iter().enumerate().map(|(idx, &v)| f(idx % m, v)).collect();
        Self {
            values,
            n_rows: self.n_rows,
            column_names: self.column_names.clone(),
            labels: self.labels.clone(),
            stage,
        }
    }
}

/// Replace every categorical attribute with one indicator column per domain
/// token. Columns follow schema order, with a categorical attribute's
/// indicators in declared domain order.
pub fn one_hot_encode(raw: &RawDataset) -> FeatureMatrix {
    let mut column_names = Vec::new();
    for attr in &raw.schema.attributes {
        match &attr.kind {
            AttributeKind::Numeric => column_names.push(attr.name.clone()),
            AttributeKind::Categorical { domain } => {
                column_names.extend(domain.iter().map(|t| format!("{}={}", attr.name, t)))
            }
        }
    }
    let m = column_names.len();

    let mut values = Vec::with_capacity(raw.len() * m);
    for record in &raw.rows {
        for (attr, value) in raw.schema.attributes.iter().zip(&record.values) {
            match (&attr.kind, *value) {
                (AttributeKind::Numeric, RawValue::Numeric(x)) => values.push(x),
                (AttributeKind::Categorical { domain }, RawValue::Category(k)) => {
                    values.extend((0..domain.len()).map(|j| if j == k { 1.0 } else { 0.0 }))
                }
                _ => unreachable!("record does not match its schema"),
            }
        }
    }

    FeatureMatrix {
        values,
        n_rows: raw.len(),
        column_names,
        labels: raw.labels(),
        stage: Stage::Encoded,
    }
}

/// Which rows the standardizer is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitScope {
    #[default]
    FullDataset,
    TrainOnly,
}

/// Per-column mean and population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationParams {
    pub means: Vec<f64>,
    pub std_devs: Vec<f64>,
    pub fit_scope: FitScope,
}

pub fn fit_standardizer(matrix: &FeatureMatrix, scope: FitScope, fit_rows: &[usize]) -> Result<StandardizationParams> {
    contract!(!fit_rows.is_empty(), "standardizer needs at least one fit row");
    contract!(
        fit_rows.iter().all(|&r| r < matrix.n_rows()),
        "fit row index out of range"
    );
    let m = matrix.n_cols();
    let mut means = vec![0.0; m];
    let mut m2 = vec![0.0; m];

    // Welford's online update.
    for (count, &r) in fit_rows.iter().enumerate() {
        let count = (count + 1) as f64;
        for (j, &x) in matrix.row(r).iter().enumerate() {
            let delta = x - means[j];
            means[j] += delta / count;
            m2[j] += delta * (x - means[j]);
        }
    }

    let n = fit_rows.len() as f64;
    let mut std_devs = Vec::with_capacity(m);
    for (j, s) in m2.into_iter().enumerate() {
        let sd = (s / n).sqrt();
        if !(sd > 0.0) {
            return Err(Error::ConstantColumn(matrix.column_names[j].clone()));
        }
        std_devs.push(sd);
    }
    Ok(StandardizationParams {
        means,
        std_devs,
        fit_scope: scope,
    })
}

pub fn standardize(matrix: &FeatureMatrix, params: &StandardizationParams) -> Result<FeatureMatrix> {
    contract!(
        params.means.len() == matrix.n_cols() && params.std_devs.len() == matrix.n_cols(),
        "standardization params cover {} columns, matrix has {}",
        params.means.len(),
        matrix.n_cols()
    );
    Ok(matrix.map_values(Stage::Standardized, |j, v| (v - params.means[j]) / params.std_devs[j]))
}

/// Constant offset added to every row before building point clouds.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryVector(pub Vec<f64>);

impl SymmetryVector {
    pub fn zero(m: usize) -> Self {
        Self(vec![0.0; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }
}

/// `(5, 6, ..., m + 4)`: large enough that standardized coordinates stay
/// mostly positive after the shift.
pub fn default_symmetry_vector(m: usize) -> Result<SymmetryVector> {
    contract!(m >= 1, "symmetry vector needs at least one component");
    Ok(SymmetryVector((0..m).map(|i| (i + 5) as f64).collect()))
}

/// Add `v` to every row. Callers are expected to pass standardized data;
/// the pipeline enforces that ordering.
pub fn symmetry_break(matrix: &FeatureMatrix, v: &SymmetryVector) -> Result<FeatureMatrix> {
    contract!(
        v.len() == matrix.n_cols(),
        "symmetry vector has {} components, matrix has {} columns",
        v.len(),
        matrix.n_cols()
    );
    contract!(v.0.iter().all(|c| c.is_finite()), "symmetry vector must be finite");
    Ok(matrix.map_values(Stage::SymmetryBroken, |j, x| x + v.0[j]))
}
