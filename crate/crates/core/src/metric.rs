//! Wasserstein and bottleneck distances between persistence diagrams.
//!
//! Diagrams of different sizes are compared through the usual diagonal
//! augmentation: each point may be matched to its nearest point on the
//! diagonal instead of a point of the other diagram. With the L-infinity
//! ground metric that costs `(death - birth) / 2`. Diagonal slots match
//! each other for free.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::assignment::{self, CostMatrix};
use crate::error::{contract, Result};
use crate::persistence::{PersistenceDiagram, PersistencePair};

/// Entry provenance within an augmented matching problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    PointToPoint,
    PointToDiagonal,
    DiagonalToPoint,
    DiagonalToDiagonal,
}

/// Square `(n1 + n2)` cost matrix: rows are the first diagram's points
/// followed by diagonal slots for the second's, columns are the second
/// diagram's points followed by diagonal slots for the first's.
#[derive(Debug, Clone)]
pub struct MatchingProblem {
    pub cost: CostMatrix,
    n1: usize,
    n2: usize,
}

impl MatchingProblem {
    /// Per-entry cost is the L-infinity distance raised to `exponent`.
    pub fn new(d1: &[PersistencePair], d2: &[PersistencePair], exponent: f64) -> Self {
        let (n1, n2) = (d1.len(), d2.len());
        let pow = |x: f64| if exponent == 1.0 { x } else { x.powf(exponent) };
        let cost = CostMatrix::from_fn(n1 + n2, |r, c| match (r < n1, c < n2) {
            (true, true) => pow(linf(&d1[r], &d2[c])),
            (true, false) => pow(to_diagonal(&d1[r])),
            (false, true) => pow(to_diagonal(&d2[c])),
            (false, false) => 0.0,
        });
        Self { cost, n1, n2 }
    }

    pub fn slot(&self, r: usize, c: usize) -> Slot {
        match (r < self.n1, c < self.n2) {
            (true, true) => Slot::PointToPoint,
            (true, false) => Slot::PointToDiagonal,
            (false, true) => Slot::DiagonalToPoint,
            (false, false) => Slot::DiagonalToDiagonal,
        }
    }
}

pub(crate) fn linf(a: &PersistencePair, b: &PersistencePair) -> f64 {
    (a.birth - b.birth).abs().max((a.death - b.death).abs())
}

pub(crate) fn to_diagonal(a: &PersistencePair) -> f64 {
    (a.death - a.birth) / 2.0
}

fn check_comparable(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<()> {
    contract!(
        d1.dimension() == d2.dimension(),
        "cannot compare diagrams of dimension {} and {}",
        d1.dimension(),
        d2.dimension()
    );
    contract!(
        d1.maxscale() == d2.maxscale(),
        "cannot compare diagrams with different maxscale ({} vs {})",
        d1.maxscale(),
        d2.maxscale()
    );
    Ok(())
}

fn canonical_cmp(a: &PersistenceDiagram, b: &PersistenceDiagram) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.pairs()
            .iter()
            .zip(b.pairs())
            .map(|(x, y)| x.death.total_cmp(&y.death).then(x.birth.total_cmp(&y.birth)))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Put the arguments in a fixed order so `f(a, b)` and `f(b, a)` run the
/// identical floating-point computation.
fn ordered<'a>(
    d1: &'a PersistenceDiagram,
    d2: &'a PersistenceDiagram,
) -> (&'a PersistenceDiagram, &'a PersistenceDiagram) {
    if canonical_cmp(d1, d2) == Ordering::Greater {
        (d2, d1)
    } else {
        (d1, d2)
    }
}

/// Exact p-Wasserstein distance with L-infinity ground metric, `p >= 1`.
pub fn wasserstein(d1: &PersistenceDiagram, d2: &PersistenceDiagram, p: f64) -> Result<f64> {
    contract!(
        p.is_finite() && p >= 1.0,
        "Wasserstein order must be finite and >= 1, got {p}"
    );
    check_comparable(d1, d2)?;
    let (a, b) = ordered(d1, d2);
    let problem = MatchingProblem::new(a.pairs(), b.pairs(), p);
    let matched = assignment::solve(&problem.cost);
    // Summing in ascending order makes the total depend only on the
    // multiset of matched costs, not on row layout.
    let mut costs: Vec<f64> = matched
        .columns
        .iter()
        .enumerate()
        .map(|(r, &c)| problem.cost.get(r, c))
        .filter(|&c| c != 0.0)
        .collect();
    costs.sort_by(f64::total_cmp);
    // Fold from +0.0: an empty `sum` of floats yields -0.0.
    let total = costs.iter().fold(0.0, |acc, c| acc + c);
    Ok(if p == 1.0 { total } else { total.powf(1.0 / p) })
}

/// Exact bottleneck distance: the smallest `t` admitting a perfect
/// augmented matching whose entries are all `<= t`.
pub fn bottleneck(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<f64> {
    check_comparable(d1, d2)?;
    let (a, b) = ordered(d1, d2);
    let problem = MatchingProblem::new(a.pairs(), b.pairs(), 1.0);
    let n = problem.cost.size();
    let mut candidates: Vec<f64> = (0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .map(|(r, c)| problem.cost.get(r, c))
        .collect();
    candidates.push(0.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // The largest candidate always admits a matching.
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if assignment::has_perfect_matching(&problem.cost, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(candidates[lo])
}

/// Symmetric nonnegative matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            contract!(row.len() == n, "distance matrix row {i} has length {}", row.len());
            data.extend_from_slice(row);
        }
        for i in 0..n {
            contract!(data[i * n + i] == 0.0, "diagonal entry {i} is not zero");
            for j in 0..n {
                let d = data[i * n + j];
                contract!(
                    d.is_finite() && d >= 0.0,
                    "entry ({i},{j}) = {d} is not finite and nonnegative"
                );
                contract!(d == data[j * n + i], "matrix is not symmetric at ({i},{j})");
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

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Apply `f` to every off-diagonal entry.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let n = self.n;
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(idx, &d)| if idx / n == idx % n { 0.0 } else { f(d) })
            .collect();
        Self { n, data }
    }
}

/// All pairwise `wasserstein(diagrams[i], diagrams[j], p)` values. Entries
/// are independent, so the result does not depend on the thread schedule.
pub fn distance_matrix(diagrams: &[PersistenceDiagram], p: f64) -> Result<DistanceMatrix> {
    contract!(
        p.is_finite() && p >= 1.0,
        "Wasserstein order must be finite and >= 1, got {p}"
    );
    if let Some(first) = diagrams.first() {
        for d in diagrams {
            check_comparable(first, d)?;
        }
    }
    let n = diagrams.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let values = pairs
        .par_iter()
        .map(|&(i, j)| wasserstein(&diagrams[i], &diagrams[j], p))
        .collect::<Result<Vec<f64>>>()?;

    let mut data = vec![0.0; n * n];
    for (&(i, j), d) in pairs.iter().zip(values) {
        data[i * n + j] = d;
        data[j * n + i] = d;
    }
    Ok(DistanceMatrix { n, data })
}
