//! Exact minimum-cost assignment on dense square matrices.
//!
//! Shortest augmenting path Hungarian method with row/column potentials,
//! O(n^3). Costs must be finite and nonnegative.

/// Optimal assignment: `columns[row]` is the column matched to `row`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub columns: Vec<usize>,
}

impl Assignment {
    /// Sum of the matched entries, accumulated in row order.
    pub fn cost(&self, costs: &CostMatrix) -> f64 {
        self.columns.iter().enumerate().map(|(r, &c)| costs.get(r, c)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(f(r, c));
            }
        }
        Self { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }
}

pub fn solve(costs: &CostMatrix) -> Assignment {
    let n = costs.size();
    if n == 0 {
        return Assignment { columns: Vec::new() };
    }

    // 1-based indices; index 0 is the virtual source column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of_col = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![f64::INFINITY; n + 1];
    let mut used = vec![false; n + 1];

    for row in 1..=n {
        row_of_col[0] = row;
        let mut col0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);

        loop {
            used[col0] = true;
            let r0 = row_of_col[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0usize;
            for c in 1..=n {
                if used[c] {
                    continue;
                }
                let reduced = costs.get(r0 - 1, c - 1) - u[r0] - v[c];
                if reduced < minv[c] {
                    minv[c] = reduced;
                    way[c] = col0;
                }
                if minv[c] < delta {
                    delta = minv[c];
                    col1 = c;
                }
            }
            for c in 0..=n {
                if used[c] {
                    u[row_of_col[c]] += delta;
                    v[c] -= delta;
                } else {
                    minv[c] -= delta;
                }
            }
            col0 = col1;
            if row_of_col[col0] == 0 {
                break;
            }
        }

        loop {
            let prev = way[col0];
            row_of_col[col0] = row_of_col[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }

    let mut columns = vec![0usize; n];
    for c in 1..=n {
        columns[row_of_col[c] - 1] = c - 1;
    }
    Assignment { columns }
}

/// Whether a perfect matching exists using only entries `<= threshold`.
pub fn has_perfect_matching(costs: &CostMatrix, threshold: f64) -> bool {
    let n = costs.size();
    let adjacency: Vec<Vec<usize>> = (0..n)
        .map(|r| (0..n).filter(|&c| costs.get(r, c) <= threshold).collect())
        .collect();
    let mut row_of_col: Vec<Option<usize>> = vec![None; n];

    fn augment(r: usize, adjacency: &[Vec<usize>], seen: &mut [bool], row_of_col: &mut [Option<usize>]) -> bool {
        for &c in &adjacency[r] {
            if seen[c] {
                continue;
            }
            seen[c] = true;
            let free = match row_of_col[c] {
                None => true,
                Some(other) => augment(other, adjacency, seen, row_of_col),
            };
            if free {
                row_of_col[c] = Some(r);
                return true;
            }
        }
        false
    }

    let mut seen = vec![false; n];
    for r in 0..n {
        seen.fill(false);
        if !augment(r, &adjacency, &mut seen, &mut row_of_col) {
            return false;
        }
    }
    true
}
