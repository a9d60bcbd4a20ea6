//! Lloyd's KMeans over per-frame mean vectors, and singleton-cluster
//! rarity flags.
//!
//! Initialization samples `k` distinct input points uniformly without
//! replacement (Forgy). The generator is ChaCha8 seeded with
//! `ClusterConfig::seed` via `SeedableRng::seed_from_u64`; with `restarts > 1`
//! every restart draws its initial centroids from the same stream in turn and
//! the lowest-inertia run is kept (earliest on ties). A draw whose index set
//! was already used is rejected and redrawn, so small inputs get every
//! possible start once `restarts` reaches `n choose k`.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::MeanVector;

pub type Point = [f64; 3];

pub const DEFAULT_K: usize = 3;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_MAX_ITERATIONS: usize = 300;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_RESTARTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Stop once no centroid moves farther than this between iterations.
    pub convergence_tolerance: f64,
    /// Independent initializations; the best objective wins.
    pub restarts: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            k: DEFAULT_K,
            seed: DEFAULT_SEED,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            convergence_tolerance: DEFAULT_TOLERANCE,
            restarts: DEFAULT_RESTARTS,
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidClusterConfig("k must be at least 1".into()));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidClusterConfig("max_iterations must be at least 1".into()));
        }
        if !self.convergence_tolerance.is_finite() || self.convergence_tolerance < 0.0 {
            return Err(Error::InvalidClusterConfig(
                "convergence tolerance must be finite and non-negative".into(),
            ));
        }
        if self.restarts < 1 {
            return Err(Error::InvalidClusterConfig("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub centroids: Vec<Point>,
    pub assignments: Vec<usize>,
    /// Sum of squared distances from each point to its assigned centroid.
    pub inertia: f64,
    pub iterations_run: usize,
    /// Objective after each assignment step of the winning run.
    pub inertia_trace: Vec<f64>,
    pub seed: u64,
}

impl ClusterModel {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        cluster_sizes(&self.assignments, self.k())
    }
}

pub fn squared_distance(a: &Point, b: &Point) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; the lowest index wins ties.
pub fn assign_point(p: &Point, centroids: &[Point]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centroids.iter().enumerate() {
        let d = squared_distance(p, c);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

pub fn inertia(points: &[Point], centroids: &[Point], assignments: &[usize]) -> f64 {
    points.iter().zip(assignments).map(|(p, &a)| squared_distance(p, &centroids[a])).sum()
}

fn cluster_sizes(assignments: &[usize], k: usize) -> Vec<usize> {
    let mut sizes = vec![0; k];
    for &a in assignments {
        sizes[a] += 1;
    }
    sizes
}

fn cluster_means(points: &[Point], assignments: &[usize], previous: &[Point]) -> Vec<Point> {
    let k = previous.len();
    let mut sums = vec![[0.0; 3]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments) {
        for d in 0..3 {
            sums[a][d] += p[d];
        }
        counts[a] += 1;
    }
    sums.into_iter()
        .zip(counts)
        .zip(previous)
        .map(|((s, n), prev)| if n == 0 { *prev } else { s.map(|v| v / n as f64) })
        .collect()
}

/// Gives every empty cluster a member: the point farthest from its own
/// centroid (lowest index on ties) among clusters that can spare one.
fn repair_empty_clusters(points: &[Point], centroids: &mut [Point], assignments: &mut [usize]) {
    let k = centroids.len();
    let mut sizes = cluster_sizes(assignments, k);
    for j in 0..k {
        if sizes[j] > 0 {
            continue;
        }
        let mut donor: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            let own = assignments[i];
            if sizes[own] < 2 {
                continue;
            }
            let d = squared_distance(p, &centroids[own]);
            if donor.is_none_or(|(_, best)| d > best) {
                donor = Some((i, d));
            }
        }
        // N >= k guarantees some cluster holds two or more points.
        let (i, _) = donor.expect("a cluster with at least two members exists");
        sizes[assignments[i]] -= 1;
        assignments[i] = j;
        sizes[j] = 1;
        centroids[j] = points[i];
    }
}

/// Runs Lloyd iterations from the given initial centroids.
pub fn kmeans_from_centroids(
    points: &[Point],
    initial: Vec<Point>,
    max_iterations: usize,
    tolerance: f64,
) -> ClusterModel {
    let mut centroids = initial;
    let mut assignments = vec![0usize; points.len()];
    let mut trace = Vec::new();
    let mut iterations_run = 0;

    for _ in 0..max_iterations {
        iterations_run += 1;
        for (a, p) in assignments.iter_mut().zip(points) {
            *a = assign_point(p, &centroids);
        }
        repair_empty_clusters(points, &mut centroids, &mut assignments);
        trace.push(inertia(points, &centroids, &assignments));

        let next = cluster_means(points, &assignments, &centroids);
        let shift = centroids
            .iter()
            .zip(&next)
            .map(|(a, b)| squared_distance(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = next;
        if shift < tolerance || shift == 0.0 {
            break;
        }
    }

    for (a, p) in assignments.iter_mut().zip(points) {
        *a = assign_point(p, &centroids);
    }
    repair_empty_clusters(points, &mut centroids, &mut assignments);
    let inertia = inertia(points, &centroids, &assignments);
    ClusterModel { centroids, assignments, inertia, iterations_run, inertia_trace: trace, seed: 0 }
}

pub fn kmeans_fit(points: &[MeanVector], config: &ClusterConfig) -> Result<ClusterModel> {
    config.validate()?;
    if points.len() < config.k {
        return Err(Error::InsufficientPoints { points: points.len(), k: config.k });
    }
    let raw: Vec<Point> = points.iter().map(MeanVector::as_array).collect();
    if let Some(index) = raw.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFiniteInput { index });
    }

    // Restarts never repeat a starting subset; once every subset has been
    // tried, further restarts would only replay the same runs.
    let subsets = binomial(raw.len(), config.k);
    let mut tried: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut best: Option<ClusterModel> = None;
    for _ in 0..config.restarts {
        if tried.len() as u128 >= subsets {
            break;
        }
        let picks = loop {
            let picks = rand::seq::index::sample(&mut rng, raw.len(), config.k).into_vec();
            let mut key = picks.clone();
            key.sort_unstable();
            if tried.insert(key) {
                break picks;
            }
        };
        let initial = picks.iter().map(|&i| raw[i]).collect();
        let model = kmeans_from_centroids(
            &raw,
            initial,
            config.max_iterations,
            config.convergence_tolerance,
        );
        if best.as_ref().is_none_or(|b| model.inertia < b.inertia) {
            best = Some(model);
        }
    }
    let mut model = best.expect("at least one restart");
    model.seed = config.seed;
    Ok(model)
}

/// `n choose k`, saturating at `u128::MAX`.
fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by i + 1
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// True for frames whose cluster has exactly one member.
pub fn rarity_flags(assignments: &[usize]) -> Vec<bool> {
    let k = assignments.iter().max().map_or(0, |m| m + 1);
    let sizes = cluster_sizes(assignments, k);
    assignments.iter().map(|&a| sizes[a] == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mv(points: &[Point]) -> Vec<MeanVector> {
        points.iter().copied().map(MeanVector::from_array).collect()
    }

    fn cfg(k: usize) -> ClusterConfig {
        ClusterConfig { k, ..ClusterConfig::default() }
    }

    #[test]
    fn k1_is_componentwise_mean() {
        let pts = [[1.0, 2.0, 3.0], [3.0, 6.0, 9.0], [5.0, 1.0, 0.0]];
        let m = kmeans_fit(&mv(&pts), &cfg(1)).unwrap();
        assert_eq!(m.assignments, vec![0, 0, 0]);
        let c = m.centroids[0];
        assert!((c[0] - 3.0).abs() < 1e-12 && (c[1] - 3.0).abs() < 1e-12 && (c[2] - 4.0).abs() < 1e-12);
        let expected: f64 = pts.iter().map(|p| squared_distance(p, &[3.0, 3.0, 4.0])).sum();
        assert!((m.inertia - expected).abs() < 1e-9);
    }

    #[test]
    fn k_equals_n_is_perfect_fit() {
        let pts = [[0.0, 0.0, 0.0], [10.0, 0.0, 0.0], [0.0, 50.0, 3.0], [200.0, 1.0, 1.0]];
        let m = kmeans_fit(&mv(&pts), &cfg(4)).unwrap();
        assert_eq!(m.inertia, 0.0);
        let mut sorted = m.assignments.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3]);
        for (p, &a) in pts.iter().zip(&m.assignments) {
            assert_eq!(&m.centroids[a], p);
        }
    }

    #[test]
    fn two_pairs_on_a_line() {
        // {0,1}|{10,11} costs 0.5 + 0.5; the exhaustive partition check lives
        // in the integration tests.
        let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [10.0, 0.0, 0.0], [11.0, 0.0, 0.0]];
        let m = kmeans_fit(&mv(&pts), &cfg(2)).unwrap();
        assert!((m.inertia - 1.0).abs() < 1e-12);
        let mut cs: Vec<f64> = m.centroids.iter().map(|c| c[0]).collect();
        cs.sort_by(f64::total_cmp);
        assert_eq!(cs, vec![0.5, 10.5]);
    }

    #[test]
    fn errors() {
        let pts = mv(&[[0.0; 3], [1.0; 3]]);
        assert!(matches!(
            kmeans_fit(&pts, &cfg(3)),
            Err(Error::InsufficientPoints { points: 2, k: 3 })
        ));
        let bad = mv(&[[0.0; 3], [f64::NAN, 0.0, 0.0]]);
        assert!(matches!(kmeans_fit(&bad, &cfg(1)), Err(Error::NonFiniteInput { index: 1 })));
        assert!(kmeans_fit(&pts, &ClusterConfig { k: 0, ..cfg(1) }).is_err());
        assert!(kmeans_fit(&pts, &ClusterConfig { max_iterations: 0, ..cfg(1) }).is_err());
        assert!(kmeans_fit(&pts, &ClusterConfig { restarts: 0, ..cfg(1) }).is_err());
        assert!(kmeans_fit(&pts, &ClusterConfig { convergence_tolerance: -1.0, ..cfg(1) }).is_err());
    }

    #[test]
    fn duplicate_points_keep_k_clusters() {
        let pts = mv(&[[5.0; 3]; 5]);
        let m = kmeans_fit(&pts, &cfg(3)).unwrap();
        assert_eq!(m.centroids.len(), 3);
        assert!(m.cluster_sizes().iter().all(|&s| s >= 1));
        assert_eq!(m.inertia, 0.0);
    }

    #[test]
    fn empty_cluster_is_reseeded_to_farthest_point() {
        // both initial centroids sit on the left group; the second one never
        // wins a point so it must be reseeded to the farthest point (x=100).
        let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [100.0, 0.0, 0.0]];
        let m = kmeans_from_centroids(&pts, vec![[0.5, 0.0, 0.0], [0.5, 0.0, 0.0]], 300, 1e-6);
        assert_eq!(m.assignments, vec![0, 0, 1]);
        assert_eq!(m.centroids[1], [100.0, 0.0, 0.0]);
        assert!((m.inertia - 0.5).abs() < 1e-12);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let pts: Vec<Point> = (0..20).map(|i| [(i * 37 % 255) as f64, (i * 11 % 97) as f64, i as f64]).collect();
        let a = kmeans_fit(&mv(&pts), &cfg(3)).unwrap();
        let b = kmeans_fit(&mv(&pts), &cfg(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.seed, DEFAULT_SEED);
    }

    #[test]
    fn assign_point_cases() {
        let cs = [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [9.0, 9.0, 9.0]];
        assert_eq!(assign_point(&[9.0, 9.0, 9.0], &cs), 2);
        assert_eq!(assign_point(&[1.0, 0.0, 0.0], &cs), 0);
        assert_eq!(assign_point(&[1.9, 0.0, 0.0], &cs), 1);
    }

    #[test]
    fn rarity() {
        assert_eq!(rarity_flags(&[0, 1, 0, 1, 2]), vec![false, false, false, false, true]);
        assert_eq!(rarity_flags(&[0, 0, 0]), vec![false; 3]);
        assert_eq!(rarity_flags(&[0, 1, 2]), vec![true; 3]);
        assert!(rarity_flags(&[]).is_empty());
    }

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(5, 5), 1);
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(6, 2), 15);
        assert_eq!(binomial(60, 30), 118264581564861424);
        assert_eq!(binomial(100_000, 50_000), u128::MAX);
    }

    #[test]
    fn restarts_cover_every_start_when_few_exist() {
        // 4 points, k=2: 6 possible starts, 10 restarts try each of them
        let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [10.0, 0.0, 0.0], [11.0, 0.0, 0.0]];
        let mut inertias = Vec::new();
        for a in 0..4 {
            for b in a + 1..4 {
                inertias.push(kmeans_from_centroids(&pts, vec![pts[a], pts[b]], 300, 1e-6).inertia);
            }
        }
        let best = inertias.iter().copied().fold(f64::INFINITY, f64::min);
        for seed in 0..50 {
            let m = kmeans_fit(&mv(&pts), &ClusterConfig { k: 2, seed, ..ClusterConfig::default() }).unwrap();
            assert_eq!(m.inertia, best);
        }
    }
}
