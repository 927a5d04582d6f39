//! Lloyd's algorithm with k-means++ seeding.

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::seed::rng;

pub const KMEANS_MAX_ITER: usize = 300;

#[derive(Clone, Debug, PartialEq)]
pub struct KMeans<T> {
    /// `k × d` cluster centres.
    pub centroids: Array2<T>,
    pub assignments: Vec<usize>,
    pub iterations: usize,
}

impl<T: Real> KMeans<T> {
    pub fn k(&self) -> usize {
        self.centroids.nrows()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k()];
        self.assignments.iter().for_each(|&a| sizes[a] += 1);
        sizes
    }
}

#[inline]
fn sq_dist<T: Real>(a: ArrayView1<T>, b: ArrayView1<T>) -> T {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum()
}

fn nearest<T: Real>(x: ArrayView1<T>, centroids: &Array2<T>) -> (usize, T) {
    let mut best = (0, T::infinity());
    for (j, c) in centroids.outer_iter().enumerate() {
        let d = sq_dist(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn plus_plus_seeds<T: Real>(data: ArrayView2<T>, k: usize, seed: u64) -> Array2<T> {
    let (n, d) = data.dim();
    let mut r = rng(seed);
    let mut centroids = Array2::zeros((k, d));
    centroids.row_mut(0).assign(&data.row(r.random_range(0..n)));
    let mut dist: Vec<T> = data
        .outer_iter()
        .map(|x| sq_dist(x, centroids.row(0)))
        .collect();
    for c in 1..k {
        let total: T = dist.iter().copied().sum();
        let pick = if total > T::zero() {
            let target = T::lit(r.random::<f64>()) * total;
            let mut acc = T::zero();
            dist.iter()
                .position(|&w| {
                    acc += w;
                    acc > target
                })
                .unwrap_or(n - 1)
        } else {
            r.random_range(0..n)
        };
        centroids.row_mut(c).assign(&data.row(pick));
        for (dv, x) in dist.iter_mut().zip(data.outer_iter()) {
            *dv = dv.min(sq_dist(x, centroids.row(c)));
        }
    }
    centroids
}

/// Clusters the rows of `data` into `k` groups; deterministic for a given `seed`.
///
/// Stops when assignments no longer change or after 300 iterations. A cluster
/// that empties is re-seeded with the point lying farthest from its own centre.
pub fn kmeans<T: Real>(data: ArrayView2<T>, k: usize, seed: u64) -> Result<KMeans<T>> {
    let (n, d) = data.dim();
    if k == 0 {
        return Err(Error::invalid("k-means needs k >= 1"));
    }
    if n < k {
        return Err(Error::invalid(format!(
            "k-means needs at least k = {k} points, found {n}"
        )));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("k-means input contains non-finite values"));
    }
    let mut centroids = plus_plus_seeds(data, k, seed);
    let mut assignments = vec![usize::MAX; n];
    let mut iterations = 0;
    while iterations < KMEANS_MAX_ITER {
        iterations += 1;
        let mut changed = false;
        for (a, x) in assignments.iter_mut().zip(data.outer_iter()) {
            let (j, _) = nearest(x, &centroids);
            if *a != j {
                *a = j;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = Array2::<T>::zeros((k, d));
        let mut counts = vec![0usize; k];
        for (&a, x) in assignments.iter().zip(data.outer_iter()) {
            counts[a] += 1;
            let mut row = sums.row_mut(a);
            row += &x;
        }
        for (j, &c) in counts.iter().enumerate() {
            if c > 0 {
                let inv = T::one() / T::from_usize_lossy(c);
                centroids.row_mut(j).assign(&sums.row(j).mapv(|v| v * inv));
            }
        }
        for j in (0..k).filter(|&j| counts[j] == 0) {
            let (far, _) = data
                .outer_iter()
                .enumerate()
                .map(|(i, x)| (i, sq_dist(x, centroids.row(assignments[i]))))
                .fold((0, T::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best });
            centroids.row_mut(j).assign(&data.row(far));
            assignments[far] = j;
        }
    }
    Ok(KMeans {
        centroids,
        assignments,
        iterations,
    })
}
