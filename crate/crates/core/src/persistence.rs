//! Dimension-0 persistent homology of Vietoris-Rips filtrations.
//!
//! Connected components of the Rips complex at scale `eps` are those of the
//! graph joining points at distance `<= eps`, so every finite death is a
//! merge distance of single-linkage clustering: an edge weight of a minimum
//! spanning tree. Kruskal's algorithm over the sorted edges produces them
//! directly. The component that never dies is recorded with death equal to
//! the filtration cap `maxscale`.

use std::cmp::Ordering;

use crate::error::{contract, Error, Result};
use crate::pointcloud::PairwiseDistances;
use crate::union_find::DisjointSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub birth: f64,
    pub death: f64,
}

impl PersistencePair {
    pub fn new(birth: f64, death: f64) -> Self {
        Self { birth, death }
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    fn cmp_death_birth(&self, other: &Self) -> Ordering {
        self.death
            .total_cmp(&other.death)
            .then(self.birth.total_cmp(&other.birth))
    }
}

/// Multiset of `(birth, death)` pairs with `0 <= birth <= death <= maxscale`.
///
/// Pairs are kept sorted by `(death, birth)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    dimension: usize,
    pairs: Vec<PersistencePair>,
    maxscale: f64,
}

impl PersistenceDiagram {
    pub fn new(dimension: usize, mut pairs: Vec<PersistencePair>, maxscale: f64) -> Result<Self> {
        contract!(
            maxscale.is_finite() && maxscale > 0.0,
            "maxscale must be finite and positive, got {maxscale}"
        );
        for p in &pairs {
            contract!(
                p.birth.is_finite() && p.death.is_finite(),
                "diagram pairs must be finite"
            );
            contract!(
                0.0 <= p.birth && p.birth <= p.death && p.death <= maxscale,
                "pair ({}, {}) is outside 0 <= birth <= death <= {maxscale}",
                p.birth,
                p.death
            );
        }
        pairs.sort_by(PersistencePair::cmp_death_birth);
        Ok(Self {
            dimension,
            pairs,
            maxscale,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn pairs(&self) -> &[PersistencePair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn maxscale(&self) -> f64 {
        self.maxscale
    }
}

/// Dimension-0 diagram of the Rips filtration over `distances`.
///
/// Edges are processed by ascending weight, ties in lexicographic `(i, j)`
/// order. Errors rather than truncating when a merge happens above
/// `maxscale`.
pub fn rips_dim0_diagram(distances: &PairwiseDistances, maxscale: f64) -> Result<PersistenceDiagram> {
    contract!(
        maxscale.is_finite() && maxscale > 0.0,
        "maxscale must be finite and positive, got {maxscale}"
    );
    let n = distances.len();
    contract!(n > 0, "cannot compute persistence of an empty cloud");

    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((distances.get(i, j), i, j));
        }
    }
    // Stable sort keeps the lexicographic generation order among ties.
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut components = DisjointSet::new(n);
    let mut pairs = Vec::with_capacity(n);
    for (weight, i, j) in edges {
        if components.union(i, j) {
            if weight > maxscale {
                return Err(Error::MaxscaleTooSmall {
                    maxscale,
                    merge_distance: weight,
                });
            }
            pairs.push(PersistencePair::new(0.0, weight));
            if components.components() == 1 {
                break;
            }
        }
    }
    pairs.push(PersistencePair::new(0.0, maxscale));
    PersistenceDiagram::new(0, pairs, maxscale)
}

/// Common filtration cap: `safety` times the largest distance in any cloud.
pub fn choose_maxscale<'a, I>(clouds: I, safety: f64) -> Result<f64>
where
    I: IntoIterator<Item = &'a PairwiseDistances>,
{
    contract!(
        safety.is_finite() && safety >= 1.0,
        "safety factor must be >= 1, got {safety}"
    );
    let mut count = 0usize;
    let mut max = 0.0f64;
    for d in clouds {
        count += 1;
        max = max.max(d.max());
    }
    contract!(count > 0, "choose_maxscale needs at least one cloud");
    let cap = safety * max;
    // All-coincident clouds still need a positive cap.
    Ok(if cap > 0.0 { cap } else { 1.0 })
}
