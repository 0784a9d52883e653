//! Projection point clouds and their intra-cloud distances.
//!
//! A record `x` in `R^m` becomes the cloud `[x, p_0(x), ..., p_{m-1}(x)]`
//! where `p_i` zeroes coordinate `i`. Axes are counted from zero.

use std::fmt::Write as _;

use crate::error::{contract, Result};

/// Copy of `x` with coordinate `axis` set to zero.
pub fn project(x: &[f64], axis: usize) -> Result<Vec<f64>> {
    contract!(
        axis < x.len(),
        "projection axis {axis} out of range for dimension {}",
        x.len()
    );
    let mut out = x.to_vec();
    out[axis] = 0.0;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
    source_row: usize,
    ambient_dim: usize,
}

impl PointCloud {
    /// Arbitrary cloud; every point must have the same length.
    pub fn from_points(points: Vec<Vec<f64>>, source_row: usize) -> Result<Self> {
        let ambient_dim = points.first().map_or(0, Vec::len);
        contract!(
            points.iter().all(|p| p.len() == ambient_dim),
            "points of a cloud must share one dimension"
        );
        contract!(
            points.iter().flatten().all(|c| c.is_finite()),
            "point coordinates must be finite"
        );
        Ok(Self {
            points,
            source_row,
            ambient_dim,
        })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn source_row(&self) -> usize {
        self.source_row
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// One point per line, coordinates separated by `delimiter`.
    pub fn to_delimited(&self, delimiter: char) -> String {
        let mut out = String::new();
        for p in &self.points {
            for (i, c) in p.iter().enumerate() {
                if i > 0 {
                    out.push(delimiter);
                }
                write!(out, "{c}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// The `m + 1` point projection cloud of `x`, in the order `[x, p_0(x), ...]`.
pub fn build_point_cloud(x: &[f64], source_row: usize) -> Result<PointCloud> {
    contract!(x.iter().all(|c| c.is_finite()), "record must be finite");
    let mut points = Vec::with_capacity(x.len() + 1);
    points.push(x.to_vec());
    for axis in 0..x.len() {
        points.push(project(x, axis)?);
    }
    Ok(PointCloud {
        points,
        source_row,
        ambient_dim: x.len(),
    })
}

/// Symmetric `n x n` matrix of nonnegative distances with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseDistances {
    n: usize,
    data: Vec<f64>,
}

impl PairwiseDistances {
    /// Validate and wrap a row-major matrix.
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            contract!(row.len() == n, "distance matrix row {i} has length {}", row.len());
            data.extend_from_slice(row);
        }
        for i in 0..n {
            contract!(data[i * n + i] == 0.0, "distance matrix diagonal must be zero");
            for j in 0..n {
                let d = data[i * n + j];
                contract!(
                    d.is_finite() && d >= 0.0,
                    "distance ({i},{j}) = {d} is not a finite nonnegative number"
                );
                contract!(d == data[j * n + i], "distance matrix is not symmetric at ({i},{j})");
            }
        }
        Ok(Self { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Euclidean distances between every pair of points in `cloud`.
pub fn pairwise_distances(cloud: &PointCloud) -> PairwiseDistances {
    let n = cloud.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean(&cloud.points[i], &cloud.points[j]);
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    PairwiseDistances { n, data }
}
