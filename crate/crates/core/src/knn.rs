//! k-nearest-neighbour voting over a precomputed distance matrix.

use crate::error::{contract, Result};
use crate::ingestion::Label;
use crate::metric::DistanceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KnnConfig {
    pub k: usize,
}

impl KnnConfig {
    pub fn new(k: usize) -> Result<Self> {
        contract!(k >= 1, "k must be at least 1");
        Ok(Self { k })
    }
}

/// Candidates ordered by `(distance to query, row index)`.
pub fn ranked_neighbors(query: usize, candidates: &[usize], distances: &DistanceMatrix) -> Result<Vec<(usize, f64)>> {
    contract!(query < distances.len(), "query row {query} out of range");
    let row = distances.row(query);
    let mut ranked = Vec::with_capacity(candidates.len());
    for &c in candidates {
        contract!(c < distances.len(), "candidate row {c} out of range");
        contract!(c != query, "query row {query} is among its own candidates");
        ranked.push((c, row[c]));
    }
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    Ok(ranked)
}

/// Majority label among `neighbors`, which must be in rank order.
///
/// A tie in vote count goes to the tied class owning the nearest neighbour;
/// the decision depends only on ranks, never on distance magnitudes.
pub fn vote(neighbors: &[(usize, f64)], labels: &[Label]) -> Label {
    let mut counts = [0usize; 2];
    let mut first_rank = [usize::MAX; 2];
    for (rank, &(row, _)) in neighbors.iter().enumerate() {
        let class = labels[row].index();
        counts[class] += 1;
        first_rank[class] = first_rank[class].min(rank);
    }
    let winner = if counts[0] != counts[1] {
        if counts[0] > counts[1] {
            0
        } else {
            1
        }
    } else if first_rank[0] != first_rank[1] {
        if first_rank[0] < first_rank[1] {
            0
        } else {
            1
        }
    } else {
        0
    };
    if winner == 0 {
        Label::NEGATIVE
    } else {
        Label::POSITIVE
    }
}

pub fn knn_predict(
    query: usize,
    candidates: &[usize],
    distances: &DistanceMatrix,
    labels: &[Label],
    config: &KnnConfig,
) -> Result<Label> {
    contract!(config.k >= 1, "k must be at least 1");
    contract!(
        candidates.len() >= config.k,
        "k = {} exceeds the {} available candidates",
        config.k,
        candidates.len()
    );
    contract!(
        labels.len() == distances.len(),
        "one label per distance-matrix row required"
    );
    let ranked = ranked_neighbors(query, candidates, distances)?;
    Ok(vote(&ranked[..config.k], labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[u8]) -> Vec<Label> {
        v.iter().map(|&x| Label::new(x).unwrap()).collect()
    }

    /// Query is row 0; row `i + 1` sits at `dists[i]`, other entries far apart.
    fn star(dists: &[f64]) -> DistanceMatrix {
        let n = dists.len() + 1;
        let mut rows = vec![vec![0.0; n]; n];
        for i in 1..n {
            rows[0][i] = dists[i - 1];
            rows[i][0] = dists[i - 1];
            for j in 1..n {
                if i != j {
                    rows[i][j] = 100.0;
                }
            }
        }
        DistanceMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn one_nearest_neighbor() {
        let dm = star(&[0.3, 0.1, 0.5]);
        let y = labels(&[0, 0, 1, 0]);
        let got = knn_predict(0, &[1, 2, 3], &dm, &y, &KnnConfig::new(1).unwrap()).unwrap();
        assert_eq!(got, Label::POSITIVE);
    }

    #[test]
    fn strict_majority() {
        let dm = star(&[0.1, 0.2, 0.3]);
        let y = labels(&[1, 0, 0, 1]);
        let got = knn_predict(0, &[1, 2, 3], &dm, &y, &KnnConfig::new(3).unwrap()).unwrap();
        assert_eq!(got, Label::NEGATIVE);
    }

    #[test]
    fn even_k_tie_goes_to_nearer_class() {
        let dm = star(&[0.5, 0.9]);
        let y = labels(&[1, 0, 1]);
        let got = knn_predict(0, &[1, 2], &dm, &y, &KnnConfig::new(2).unwrap()).unwrap();
        assert_eq!(got, Label::NEGATIVE);
        let y = labels(&[0, 1, 0]);
        let got = knn_predict(0, &[1, 2], &dm, &y, &KnnConfig::new(2).unwrap()).unwrap();
        assert_eq!(got, Label::POSITIVE);
    }

    #[test]
    fn boundary_distance_ties_prefer_smaller_row() {
        let dm = star(&[1.0, 1.0, 1.0]);
        let y = labels(&[0, 1, 0, 0]);
        let got = knn_predict(0, &[3, 2, 1], &dm, &y, &KnnConfig::new(1).unwrap()).unwrap();
        assert_eq!(got, Label::POSITIVE);
    }

    #[test]
    fn contract_errors() {
        let dm = star(&[1.0, 2.0]);
        let y = labels(&[0, 1, 0]);
        assert!(knn_predict(0, &[1], &dm, &y, &KnnConfig { k: 2 }).is_err());
        assert!(knn_predict(0, &[0, 1], &dm, &y, &KnnConfig { k: 1 }).is_err());
        assert!(KnnConfig::new(0).is_err());
    }
}
