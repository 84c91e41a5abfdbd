//! Lloyd and Hartigan K-means over dense vectors.
//!
//! Both variants start every restart from the same k-means++ seeding, so for
//! a given config they can be compared from identical initializations.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;

use super::{check_cluster_count, Algorithm, ClusterConfig, Partition};
use crate::corpus::DenseVector;
use crate::error::{Error, Result};
use crate::seed::{rng_for, stream};

pub type Centroids = Vec<Vec<f64>>;

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; ties go to the lowest index.
pub(crate) fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

pub fn centroids_of(points: &[Vec<f64>], assignments: &[usize], k: usize) -> Centroids {
    let dim = points.first().map_or(0, Vec::len);
    let mut sums = vec![vec![0.0; dim]; k];
    let mut sizes = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments) {
        sizes[a] += 1;
        for (s, x) in sums[a].iter_mut().zip(p) {
            *s += x;
        }
    }
    for (s, &n) in sums.iter_mut().zip(&sizes) {
        if n > 0 {
            s.iter_mut().for_each(|v| *v /= n as f64);
        }
    }
    sums
}

pub fn sse(points: &[Vec<f64>], assignments: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum()
}

/// k-means++ seeding; returns the chosen point indices.
pub fn kmeans_pp_seeds<R: Rng>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<usize> {
    let n = points.len();
    let mut seeds = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[seeds[0]])).collect();
    while seeds.len() < k {
        let next = match WeightedIndex::new(&d2) {
            Ok(dist) => dist.sample(rng),
            // every remaining point coincides with a seed
            Err(_) => (0..n).find(|i| !seeds.contains(i)).expect("k <= n"),
        };
        seeds.push(next);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &points[next]));
        }
    }
    seeds
}

/// Assignment of every point to its nearest seed, with empty clusters
/// repaired.
pub fn seed_assignment<R: Rng>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<usize> {
    let seeds = kmeans_pp_seeds(points, k, rng);
    let centroids: Centroids = seeds.iter().map(|&s| points[s].clone()).collect();
    let mut assignments: Vec<usize> = points.iter().map(|p| nearest(p, &centroids).0).collect();
    for (c, &s) in seeds.iter().enumerate() {
        // a seed that coincides with an earlier one would lose its cluster
        if !assignments.contains(&c) {
            assignments[s] = c;
        }
    }
    refill_empty(points, &mut assignments, &centroids, k);
    assignments
}

/// Give each empty cluster the point farthest from its centroid, taken
/// from clusters with more than one member.
fn refill_empty(points: &[Vec<f64>], assignments: &mut [usize], centroids: &[Vec<f64>], k: usize) {
    let mut sizes = vec![0usize; k];
    for &a in assignments.iter() {
        sizes[a] += 1;
    }
    for c in 0..k {
        if sizes[c] > 0 {
            continue;
        }
        let mut far = None;
        let mut far_d = f64::NEG_INFINITY;
        for (i, p) in points.iter().enumerate() {
            let a = assignments[i];
            if sizes[a] <= 1 {
                continue;
            }
            let d = sq_dist(p, &centroids[a]);
            if d > far_d {
                far_d = d;
                far = Some(i);
            }
        }
        if let Some(i) = far {
            sizes[assignments[i]] -= 1;
            assignments[i] = c;
            sizes[c] += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansRun {
    pub assignments: Vec<usize>,
    pub centroids: Centroids,
    pub sse: f64,
    /// SSE after initialization and after every iteration.
    pub sse_trace: Vec<f64>,
    pub iterations: usize,
}

/// Lloyd iterations from an initial assignment until the assignment reaches
/// a fixpoint or `max_iterations` updates have run.
pub fn lloyd_from(points: &[Vec<f64>], init: Vec<usize>, k: usize, max_iterations: usize) -> KmeansRun {
    let mut assignments = init;
    let mut centroids = centroids_of(points, &assignments, k);
    let mut sse_trace = vec![sse(points, &assignments, &centroids)];
    let mut iterations = 0;
    while iterations < max_iterations {
        let mut next: Vec<usize> = points
            .par_iter()
            .map(|p| nearest(p, &centroids).0)
            .collect();
        refill_empty(points, &mut next, &centroids, k);
        if next == assignments {
            break;
        }
        assignments = next;
        centroids = centroids_of(points, &assignments, k);
        sse_trace.push(sse(points, &assignments, &centroids));
        iterations += 1;
    }
    KmeansRun {
        sse: *sse_trace.last().unwrap(),
        assignments,
        centroids,
        sse_trace,
        iterations,
    }
}

/// Hartigan's point-wise K-means.
///
/// Moving x from A to B changes SSE by
/// `n_B/(n_B+1) |x - c_B|^2 - n_A/(n_A-1) |x - c_A|^2`; a move is taken only
/// when that is negative, with means and SSE updated in place.
#[derive(Debug, Clone)]
pub struct Hartigan<'a> {
    points: &'a [Vec<f64>],
    assignments: Vec<usize>,
    centroids: Centroids,
    sizes: Vec<usize>,
    sse: f64,
}

impl<'a> Hartigan<'a> {
    pub fn new(points: &'a [Vec<f64>], init: Vec<usize>, k: usize) -> Self {
        let mut sizes = vec![0; k];
        for &a in &init {
            sizes[a] += 1;
        }
        let centroids = centroids_of(points, &init, k);
        let sse = sse(points, &init, &centroids);
        Hartigan {
            points,
            assignments: init,
            centroids,
            sizes,
            sse,
        }
    }

    /// Incrementally maintained SSE.
    pub fn sse(&self) -> f64 {
        self.sse
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    /// One pass over the points in index order; returns accepted moves
    /// together with their SSE deltas.
    pub fn sweep(&mut self) -> Vec<f64> {
        let mut deltas = Vec::new();
        for i in 0..self.points.len() {
            let x = &self.points[i];
            let from = self.assignments[i];
            let n_from = self.sizes[from];
            if n_from <= 1 {
                continue;
            }
            let removal =
                n_from as f64 / (n_from - 1) as f64 * sq_dist(x, &self.centroids[from]);
            let mut best = None;
            let mut best_add = removal;
            for (to, c) in self.centroids.iter().enumerate() {
                if to == from {
                    continue;
                }
                let n_to = self.sizes[to] as f64;
                let add = n_to / (n_to + 1.0) * sq_dist(x, c);
                if add < best_add {
                    best_add = add;
                    best = Some(to);
                }
            }
            let Some(to) = best else { continue };
            let delta = best_add - removal;
            if delta >= -1e-12 * removal.max(f64::MIN_POSITIVE) {
                continue;
            }
            let nf = n_from as f64;
            let nt = self.sizes[to] as f64;
            for (c, v) in self.centroids[from].iter_mut().zip(x) {
                *c = (nf * *c - v) / (nf - 1.0);
            }
            for (c, v) in self.centroids[to].iter_mut().zip(x) {
                *c = (nt * *c + v) / (nt + 1.0);
            }
            self.sizes[from] -= 1;
            self.sizes[to] += 1;
            self.assignments[i] = to;
            self.sse += delta;
            deltas.push(delta);
        }
        deltas
    }

    /// SSE recomputed from scratch, replacing the running value and means.
    pub fn resync(&mut self) -> f64 {
        self.centroids = centroids_of(self.points, &self.assignments, self.sizes.len());
        self.sse = sse(self.points, &self.assignments, &self.centroids);
        self.sse
    }
}

pub fn hartigan_from(points: &[Vec<f64>], init: Vec<usize>, k: usize, max_iterations: usize) -> KmeansRun {
    let mut h = Hartigan::new(points, init, k);
    let mut sse_trace = vec![h.sse()];
    let mut iterations = 0;
    while iterations < max_iterations {
        let moves = h.sweep();
        iterations += 1;
        sse_trace.push(h.resync());
        if moves.is_empty() {
            break;
        }
    }
    KmeansRun {
        sse: h.sse,
        assignments: h.assignments,
        centroids: h.centroids,
        sse_trace,
        iterations,
    }
}

fn check_points(vecs: &[DenseVector], k: usize) -> Result<Vec<Vec<f64>>> {
    let dim = vecs.first().map_or(0, DenseVector::dim);
    if let Some(v) = vecs.iter().find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.dim(),
        });
    }
    check_cluster_count(k, vecs.len())?;
    if vecs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(vecs.iter().map(|v| v.values().to_vec()).collect())
}

fn cluster_dense(
    vecs: &[DenseVector],
    config: &ClusterConfig,
    run: fn(&[Vec<f64>], Vec<usize>, usize, usize) -> KmeansRun,
) -> Result<Partition> {
    config.validate()?;
    let points = check_points(vecs, config.n_clusters)?;
    let k = config.n_clusters;
    let runs: Vec<(Vec<usize>, f64)> = (0..config.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = rng_for(config.seed, &[stream::CLUSTER, restart as u64]);
            let init = seed_assignment(&points, k, &mut rng);
            let r = run(&points, init, k, config.max_iterations);
            (r.assignments, r.sse)
        })
        .collect();
    Ok(Partition::from_restarts(config, runs, false))
}

/// Lloyd's K-means with k-means++ restarts; the restart with least SSE wins.
pub fn cluster_kmeans(vecs: &[DenseVector], config: &ClusterConfig) -> Result<Partition> {
    let config = ClusterConfig {
        algorithm: Algorithm::Kmeans,
        ..config.clone()
    };
    cluster_dense(vecs, &config, lloyd_from)
}

/// Hartigan's K-means with k-means++ restarts; the restart with least SSE wins.
pub fn cluster_hartigan(vecs: &[DenseVector], config: &ClusterConfig) -> Result<Partition> {
    let config = ClusterConfig {
        algorithm: Algorithm::HartiganKmeans,
        ..config.clone()
    };
    cluster_dense(vecs, &config, hartigan_from)
}
