//! Independent reference computations for the integration tests. Nothing here
//! calls into the clustering or feature code it is used to check.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type P3 = [f64; 3];

fn sq(a: &P3, b: &P3) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

/// Cost of a labelling where every label in `0..k` is used; `None` otherwise.
pub fn partition_cost(points: &[P3], labels: &[usize], k: usize) -> Option<f64> {
    let mut sums = vec![[0.0; 3]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        for d in 0..3 {
            sums[l][d] += p[d];
        }
        counts[l] += 1;
    }
    if counts.contains(&0) {
        return None;
    }
    let means: Vec<P3> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| [s[0] / c as f64, s[1] / c as f64, s[2] / c as f64])
        .collect();
    Some(points.iter().zip(labels).map(|(p, &l)| sq(p, &means[l])).sum())
}

/// Every labelling of `n` points into exactly `k` non-empty groups, by
/// brute force over all k^n label vectors.
pub fn all_partitions(n: usize, k: usize) -> Vec<Vec<usize>> {
    let total = k.pow(n as u32);
    (0..total)
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let l = code % k;
                    code /= k;
                    l
                })
                .collect::<Vec<_>>()
        })
        .filter(|labels| (0..k).all(|l| labels.contains(&l)))
        .collect()
}

/// Global optimum of the KMeans objective and every labelling attaining it
/// (within `rel_tol`).
pub fn brute_force_optimum(points: &[P3], k: usize, rel_tol: f64) -> (f64, Vec<Vec<usize>>) {
    let scored: Vec<(f64, Vec<usize>)> = all_partitions(points.len(), k)
        .into_iter()
        .filter_map(|l| partition_cost(points, &l, k).map(|c| (c, l)))
        .collect();
    let best = scored.iter().map(|(c, _)| *c).fold(f64::INFINITY, f64::min);
    let winners = scored
        .into_iter()
        .filter(|(c, _)| *c <= best + rel_tol * best.max(1.0))
        .map(|(_, l)| l)
        .collect();
    (best, winners)
}

/// Canonical form of a labelling: groups as sorted index sets, sorted.
pub fn groups(labels: &[usize]) -> Vec<Vec<usize>> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut out: Vec<Vec<usize>> = (0..k)
        .map(|c| (0..labels.len()).filter(|&i| labels[i] == c).collect())
        .filter(|g: &Vec<usize>| !g.is_empty())
        .collect();
    out.sort();
    out
}

/// Index of the nearest centre by a plain linear scan, lowest index on ties.
pub fn nearest_by_scan(p: &P3, centres: &[P3]) -> usize {
    let d: Vec<f64> = centres.iter().map(|c| sq(p, c)).collect();
    let min = d.iter().copied().fold(f64::INFINITY, f64::min);
    d.iter().position(|&x| x == min).unwrap()
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<P3> {
    (0..n)
        .map(|_| [rng.random_range(0.0..=255.0), rng.random_range(0.0..=255.0), rng.random_range(0.0..=255.0)])
        .collect()
}

pub fn random_pixels(seed: u64, n: usize) -> Vec<[u8; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| [rng.random(), rng.random(), rng.random()]).collect()
}

/// Mean per channel by summing f64 pixel values one at a time.
pub fn naive_means(pixels: &[[u8; 3]]) -> P3 {
    let mut s = [0.0f64; 3];
    for p in pixels {
        s[0] += p[0] as f64;
        s[1] += p[1] as f64;
        s[2] += p[2] as f64;
    }
    let n = pixels.len() as f64;
    [s[0] / n, s[1] / n, s[2] / n]
}
