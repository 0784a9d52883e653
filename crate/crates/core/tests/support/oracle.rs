//! Slow reference computations used to check the library. None of these
//! share code paths with the implementations they check.

#![allow(dead_code)]

use topmix::PairwiseDistances;

/// Dimension-0 diagram by sweeping thresholds over all distinct pairwise
/// distances and counting connected components of the threshold graph
/// with a fresh depth-first search at every step.
pub fn sweep_dim0(d: &PairwiseDistances, maxscale: f64) -> Vec<(f64, f64)> {
    let n = d.len();
    let mut thresholds: Vec<f64> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            thresholds.push(d.get(i, j));
        }
    }
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    let count_components = |t: f64| {
        let mut seen = vec![false; n];
        let mut count = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(u) = stack.pop() {
                for v in 0..n {
                    if !seen[v] && d.get(u, v) <= t {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    };

    let mut pairs: Vec<(f64, f64)> = Vec::new();
    let mut alive = n;
    for t in thresholds {
        let now = count_components(t);
        for _ in now..alive {
            pairs.push((0.0, t));
        }
        alive = now;
    }
    if n > 0 {
        pairs.push((0.0, maxscale));
    }
    pairs.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    pairs
}

fn linf(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn diag(a: (f64, f64)) -> f64 {
    (a.1 - a.0) / 2.0
}

/// Enumerate every partial matching of `a` into `b`; unmatched points on
/// either side go to the diagonal. `combine` folds per-pair costs.
fn enumerate(a: &[(f64, f64)], b: &[(f64, f64)], cost: &dyn Fn(f64) -> f64, combine: &dyn Fn(f64, f64) -> f64) -> f64 {
    fn rec(
        i: usize,
        a: &[(f64, f64)],
        b: &[(f64, f64)],
        used: &mut Vec<bool>,
        acc: f64,
        cost: &dyn Fn(f64) -> f64,
        combine: &dyn Fn(f64, f64) -> f64,
        best: &mut f64,
    ) {
        if i == a.len() {
            let mut total = acc;
            for (j, &y) in b.iter().enumerate() {
                if !used[j] {
                    total = combine(total, cost(diag(y)));
                }
            }
            if total < *best {
                *best = total;
            }
            return;
        }
        rec(i + 1, a, b, used, combine(acc, cost(diag(a[i]))), cost, combine, best);
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                rec(
                    i + 1,
                    a,
                    b,
                    used,
                    combine(acc, cost(linf(a[i], b[j]))),
                    cost,
                    combine,
                    best,
                );
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(0, a, b, &mut vec![false; b.len()], 0.0, cost, combine, &mut best);
    best
}

pub fn brute_wasserstein(a: &[(f64, f64)], b: &[(f64, f64)], p: f64) -> f64 {
    let total = enumerate(a, b, &|c| c.powf(p), &|x, y| x + y);
    total.powf(1.0 / p)
}

pub fn brute_bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    enumerate(a, b, &|c| c, &f64::max)
}

/// Distances inside the projection cloud of `y` from the closed forms
/// `d(y, p_i y) = |y_i|` and `d(p_i y, p_j y) = sqrt(y_i^2 + y_j^2)`.
/// Index 0 is `y` itself, index `i + 1` is its projection along axis `i`.
pub fn closed_form_cloud_distances(y: &[f64]) -> Vec<Vec<f64>> {
    let m = y.len();
    let mut out = vec![vec![0.0; m + 1]; m + 1];
    for i in 0..m {
        out[0][i + 1] = y[i].abs();
        out[i + 1][0] = y[i].abs();
        for j in 0..m {
            if i != j {
                out[i + 1][j + 1] = (y[i] * y[i] + y[j] * y[j]).sqrt();
            }
        }
    }
    out
}

/// Mean and population standard deviation by the two-pass formula.
pub fn two_pass_moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) || a == b
}
