use nalgebra::DMatrix;
use rand::Rng as _;

use super::{nearest, ClusterModel};
use crate::error::{Error, Result};
use crate::linalg::{rows_of, squared_distance};
use crate::rng::{Rng, SeedStream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmeansConfig {
    pub restarts: usize,
    pub max_iters: usize,
}

impl Default for KmeansConfig {
    fn default() -> Self {
        KmeansConfig {
            restarts: 10,
            max_iters: 300,
        }
    }
}

/// k-means++ seeding: the first center uniformly, then each next center with
/// probability proportional to the squared distance to the nearest chosen one.
pub(crate) fn plus_plus(rows: &[Vec<f64>], k: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut d2: Vec<f64> = rows.iter().map(|r| squared_distance(r, &rows[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut u = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            pick
        } else {
            (0..n).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(next);
        for (i, r) in rows.iter().enumerate() {
            d2[i] = d2[i].min(squared_distance(r, &rows[next]));
        }
    }
    chosen.into_iter().map(|i| rows[i].clone()).collect()
}

pub(crate) fn means(rows: &[Vec<f64>], labels: &[usize], centers: &mut [Vec<f64>]) -> Vec<usize> {
    let d = rows.first().map_or(0, |r| r.len());
    let k = centers.len();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (r, &l) in rows.iter().zip(labels) {
        if l > 0 {
            counts[l - 1] += 1;
            for (s, v) in sums[l - 1].iter_mut().zip(r) {
                *s += v;
            }
        }
    }
    for kk in 0..k {
        if counts[kk] > 0 {
            centers[kk] = sums[kk].iter().map(|s| s / counts[kk] as f64).collect();
        }
    }
    counts
}

/// Moves the center of every empty cluster onto the clustered point farthest
/// from its own center, relabelling that point.
pub(crate) fn reseed_empty(rows: &[Vec<f64>], labels: &mut [usize], centers: &mut [Vec<f64>], counts: &mut [usize]) {
    for kk in 0..centers.len() {
        if counts[kk] > 0 {
            continue;
        }
        let far = (0..rows.len())
            .filter(|&i| labels[i] > 0 && counts[labels[i] - 1] > 1)
            .map(|i| (i, squared_distance(&rows[i], &centers[labels[i] - 1])))
            .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((i, d)),
            });
        if let Some((i, _)) = far {
            counts[labels[i] - 1] -= 1;
            labels[i] = kk + 1;
            counts[kk] = 1;
            centers[kk] = rows[i].clone();
        }
    }
}

/// Lloyd iterations from the given centers. Returns 1-based labels and the
/// within-cluster sum of squares.
pub(crate) fn lloyd(rows: &[Vec<f64>], mut centers: Vec<Vec<f64>>, max_iters: usize) -> (Vec<usize>, Vec<Vec<f64>>, f64) {
    let mut labels: Vec<usize> = vec![0; rows.len()];
    for _ in 0..max_iters {
        let next: Vec<usize> = rows.iter().map(|r| nearest(r, &centers).0 + 1).collect();
        let changed = next != labels;
        labels = next;
        let mut counts = means(rows, &labels, &mut centers);
        if counts.contains(&0) {
            reseed_empty(rows, &mut labels, &mut centers, &mut counts);
            means(rows, &labels, &mut centers);
            continue;
        }
        if !changed {
            break;
        }
    }
    let cost = rows
        .iter()
        .zip(&labels)
        .map(|(r, &l)| squared_distance(r, &centers[l - 1]))
        .sum();
    (labels, centers, cost)
}

pub fn kmeans_with(points: &DMatrix<f64>, k: usize, config: &KmeansConfig, seed: u64) -> Result<ClusterModel> {
    let n = points.nrows();
    if n == 0 {
        return Err(Error::validation("points", "no rows to cluster"));
    }
    if k == 0 || k > n {
        return Err(Error::validation("cluster count", format!("{k} not in 1..={n}")));
    }
    let rows = rows_of(points);
    let root = SeedStream::new(seed);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for r in 0..config.restarts.max(1) {
        let init = plus_plus(&rows, k, &mut root.index(r as u64).rng());
        let (labels, _, cost) = lloyd(&rows, init, config.max_iters.max(1));
        if best.as_ref().map_or(true, |(_, c)| cost < *c) {
            best = Some((labels, cost));
        }
    }
    let (labels, cost) = best.expect("at least one restart");
    Ok(ClusterModel::from_labels(points, k, labels, cost))
}

/// K-means with the default configuration.
pub fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64) -> Result<ClusterModel> {
    kmeans_with(points, k, &KmeansConfig::default(), seed)
}
