//! Clustering of sites into subensembles by their complex coupling.
//!
//! Sites are points z_i = η b_i Ω_i e^{iφ_i} in the complex plane and are
//! clustered by Lloyd's k-means. For every cluster count M' = 1..=M two
//! deterministic seedings are run and the lower within-cluster sum of
//! squares kept:
//!
//! * quantile seeding: centroid j starts at the point of sorted rank
//!   ⌊(j + ½)N/M'⌋, where points are sorted by phase, then magnitude;
//! * split seeding: the M'−1 solution plus the point farthest from its
//!   centroid.
//!
//! Split seeding makes the objective non-increasing in M.

use super::{wrap_phase, ModelError, SiteCoupling, SubensembleGroup, SubensembleSpec};
use crate::C64;
use std::cmp::Ordering;

const MAX_ITERATIONS: usize = 100;

struct Clustering {
    labels: Vec<usize>,
    centroids: Vec<C64>,
    ssd: f64,
}

fn sort_key(z: C64) -> (f64, f64) {
    (wrap_phase(z.arg()), z.norm())
}

fn cmp_points(a: C64, b: C64) -> Ordering {
    let (pa, ma) = sort_key(a);
    let (pb, mb) = sort_key(b);
    pa.total_cmp(&pb).then(ma.total_cmp(&mb))
}

fn ssd(points: &[C64], labels: &[usize], centroids: &[C64]) -> f64 {
    points.iter().zip(labels).map(|(z, &l)| (z - centroids[l]).norm_sqr()).sum()
}

fn recenter(points: &[C64], labels: &[usize], k: usize) -> Vec<C64> {
    let mut sums = vec![C64::new(0.0, 0.0); k];
    let mut counts = vec![0usize; k];
    for (z, &l) in points.iter().zip(labels) {
        sums[l] += z;
        counts[l] += 1;
    }
    sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect()
}

/// Moves single points into empty clusters so every label is used.
fn fill_empty(points: &[C64], labels: &mut [usize], centroids: &mut [C64], order: &[usize]) {
    let k = centroids.len();
    loop {
        let mut counts = vec![0usize; k];
        labels.iter().for_each(|&l| counts[l] += 1);
        let Some(empty) = counts.iter().position(|&c| c == 0) else { return };
        // farthest point among clusters that can spare one; later sorted rank wins ties
        let mut best: Option<(f64, usize)> = None;
        for &i in order.iter().rev() {
            if counts[labels[i]] < 2 {
                continue;
            }
            let d = (points[i] - centroids[labels[i]]).norm_sqr();
            if best.is_none_or(|(bd, _)| d > bd) {
                best = Some((d, i));
            }
        }
        let (_, i) = best.expect("fewer points than clusters");
        labels[i] = empty;
        centroids[empty] = points[i];
    }
}

fn lloyd(points: &[C64], mut centroids: Vec<C64>, order: &[usize]) -> Clustering {
    let k = centroids.len();
    let nearest = |z: C64, current: Option<usize>, centroids: &[C64]| {
        let mut best = current.unwrap_or(0);
        let mut best_d = (z - centroids[best]).norm_sqr();
        for (j, c) in centroids.iter().enumerate() {
            let d = (z - c).norm_sqr();
            if d < best_d {
                best = j;
                best_d = d;
            }
        }
        best
    };
    let mut labels: Vec<usize> = points.iter().map(|&z| nearest(z, None, &centroids)).collect();
    fill_empty(points, &mut labels, &mut centroids, order);
    centroids = recenter(points, &labels, k);
    for _ in 0..MAX_ITERATIONS {
        let mut next: Vec<usize> = points.iter().zip(&labels).map(|(&z, &l)| nearest(z, Some(l), &centroids)).collect();
        fill_empty(points, &mut next, &mut centroids, order);
        let changed = next != labels;
        labels = next;
        centroids = recenter(points, &labels, k);
        if !changed {
            break;
        }
    }
    let ssd = ssd(points, &labels, &centroids);
    Clustering { labels, centroids, ssd }
}

/// Partitions sites into `m` subensembles by closeness of η b_i Ω_i e^{iφ_i}.
///
/// Each group's coupling and phase are the magnitude and phase of its
/// centroid. Groups are ordered by centroid phase, then magnitude; sites
/// within a group are ascending.
pub fn group_into_subensembles(sites: &[SiteCoupling], eta: f64, m: usize) -> Result<SubensembleSpec, ModelError> {
    if sites.is_empty() {
        return Err(ModelError::EmptyInput);
    }
    if m == 0 || m > sites.len() {
        return Err(ModelError::InvalidSpec(format!("need 1 <= M <= {}, got {m}", sites.len())));
    }
    let points: Vec<C64> = sites.iter().map(|s| s.complex_coupling(eta)).collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| cmp_points(points[a], points[b]).then(a.cmp(&b)));

    let n = points.len();
    let mut best = lloyd(&points, vec![recenter(&points, &vec![0; n], 1)[0]], &order);
    for k in 2..=m {
        let quantile: Vec<C64> = (0..k).map(|j| points[order[((2 * j + 1) * n) / (2 * k)]]).collect();
        let from_quantiles = lloyd(&points, quantile, &order);

        let far = order
            .iter()
            .rev()
            .copied()
            .max_by(|&a, &b| {
                let da = (points[a] - best.centroids[best.labels[a]]).norm_sqr();
                let db = (points[b] - best.centroids[best.labels[b]]).norm_sqr();
                da.total_cmp(&db)
            })
            .unwrap();
        let mut split = best.centroids.clone();
        split.push(points[far]);
        let from_split = lloyd(&points, split, &order);

        best = if from_quantiles.ssd <= from_split.ssd { from_quantiles } else { from_split };
    }

    let mut groups: Vec<(C64, Vec<usize>)> = best
        .centroids
        .iter()
        .enumerate()
        .map(|(j, &c)| (c, (0..n).filter(|&i| best.labels[i] == j).collect()))
        .collect();
    groups.sort_by(|a, b| cmp_points(a.0, b.0).then(a.1.cmp(&b.1)));
    Ok(SubensembleSpec {
        groups: groups
            .into_iter()
            .map(|(c, sites)| SubensembleGroup { sites, coupling: c.norm(), phase: wrap_phase(c.arg()) })
            .collect(),
    })
}

/// Within-cluster sum of squared distances of a grouping to its centroids.
pub fn within_cluster_ssd(sites: &[SiteCoupling], eta: f64, spec: &SubensembleSpec) -> f64 {
    spec.groups
        .iter()
        .map(|g| {
            let centre = g.complex_coupling();
            g.sites.iter().map(|&i| (sites[i].complex_coupling(eta) - centre).norm_sqr()).sum::<f64>()
        })
        .sum()
}
