//! k-means baseline on analyzer coordinates restricted to the top `log2(k)` concepts.

use ndarray::{s, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{ConceptBasis, Side};
use crate::error::{Error, Result};

const MAX_LLOYD_ITERS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub k: usize,
    /// Number of concept dims used, `log2(k)`.
    pub p: usize,
    pub assignments: Vec<usize>,
    /// k×p
    pub centroids: Array2<f64>,
    pub inertia: f64,
}

/// Lloyd's algorithm with k-means++ seeding, best of `restarts` by inertia.
///
/// Restart `i` draws from its own ChaCha stream of `seed`, so the result does not depend
/// on how restarts are scheduled across threads. Inertia ties go to the earlier restart.
pub fn kmeans_spectral(basis: &ConceptBasis, k: usize, seed: u64, restarts: usize, side: Side) -> Result<KMeansResult> {
    if k < 2 || !k.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(k));
    }
    let p = k.trailing_zeros() as usize;
    if p > basis.rank() {
        return Err(Error::InvalidConfig(format!(
            "k={k} needs {p} concept dims but the basis has rank {}",
            basis.rank()
        )));
    }
    let points = match side {
        Side::Word => basis.word_analyzers.slice(s![.., ..p]).to_owned(),
        Side::Context => basis.context_analyzers.slice(s![..p, ..]).t().to_owned(),
    };
    if points.nrows() < k {
        return Err(Error::InvalidConfig(format!("{} points cannot form {k} clusters", points.nrows())));
    }
    let restarts = restarts.max(1);
    let runs: Vec<KMeansResult> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            lloyd(points.view(), k, p, &mut rng)
        })
        .collect();
    let best = runs
        .into_iter()
        .reduce(|best, run| if run.inertia < best.inertia { run } else { best })
        .unwrap();
    Ok(best)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn row(m: ArrayView2<f64>, i: usize) -> Vec<f64> {
    m.row(i).to_vec()
}

fn plus_plus(points: ArrayView2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.nrows();
    let mut centers = vec![row(points, rng.random_range(0..n))];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(&row(points, i), &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = row(points, pick);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(&row(points, i), &c));
        }
        centers.push(c);
    }
    centers
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(point, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn lloyd(points: ArrayView2<f64>, k: usize, p: usize, rng: &mut ChaCha8Rng) -> KMeansResult {
    let n = points.nrows();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| row(points, i)).collect();
    let mut centers = plus_plus(points, k, rng);
    let mut assignments = vec![usize::MAX; n];
    for _ in 0..MAX_LLOYD_ITERS {
        let mut changed = false;
        for (i, pt) in rows.iter().enumerate() {
            let (c, _) = nearest(pt, &centers);
            if assignments[i] != c {
                assignments[i] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; p]; k];
        let mut counts = vec![0usize; k];
        for (pt, &c) in rows.iter().zip(&assignments) {
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(pt) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                // an emptied cluster takes over the point farthest from its center
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = sq_dist(&rows[a], &centers[assignments[a]]);
                        let db = sq_dist(&rows[b], &centers[assignments[b]]);
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .unwrap();
                centers[c] = rows[far].clone();
                assignments[far] = c;
            }
        }
    }
    let inertia = rows.iter().zip(&assignments).map(|(pt, &c)| sq_dist(pt, &centers[c])).sum();
    let mut centroids = Array2::zeros((k, p));
    for (c, center) in centers.iter().enumerate() {
        for (j, x) in center.iter().enumerate() {
            centroids[[c, j]] = *x;
        }
    }
    KMeansResult {
        k,
        p,
        assignments,
        centroids,
        inertia,
    }
}
