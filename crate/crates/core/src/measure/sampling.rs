//! Random measurement bases and single-shot sampling.
//!
//! Seeding: all draws for direction index d come from ChaCha8 seeded with
//! the base seed and switched to stream d, so each direction's shots are
//! reproducible on their own and independent of scheduling.

use super::MeasureError;
use crate::engine::{apply_global_rotation, StateVector};
use crate::linalg::rotation_to_z;
use crate::par;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Point on the Bloch sphere in polar angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub theta: f64,
    pub phi: f64,
}

impl Direction {
    pub fn unit(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn from_unit(v: [f64; 3]) -> Self {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        Self { theta: (v[2] / r).clamp(-1.0, 1.0).acos(), phi: v[1].atan2(v[0]).rem_euclid(2.0 * PI) }
    }
}

/// Generator for direction index `d` under base seed `seed`.
pub fn direction_rng(seed: u64, d: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(d);
    rng
}

/// `k` directions uniform on the sphere: z = 2u₁ − 1, φ = 2πu₂.
pub fn random_directions(k: usize, seed: u64) -> Vec<Direction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .map(|_| {
            let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
            let phi = 2.0 * PI * rng.random::<f64>();
            Direction { theta: z.clamp(-1.0, 1.0).acos(), phi }
        })
        .collect()
}

/// Copy of `state` rotated so that measuring σ_z afterwards measures along `dir`.
pub fn rotate_to_direction(state: &StateVector, dir: [f64; 3]) -> StateVector {
    let (axis, angle) = rotation_to_z(dir);
    let mut out = state.clone();
    if angle != 0.0 {
        apply_global_rotation(&mut out, axis, angle);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub direction_index: usize,
    pub direction: Direction,
    pub shot_index: usize,
    /// Base seed of the sampling run.
    pub rng_seed: u64,
    pub sites: Vec<usize>,
    /// One bit per entry of `sites`.
    pub outcomes: Vec<u8>,
}

/// Simulates `shots` projective measurements per direction on the listed sites.
pub fn sample_shots(
    state: &StateVector,
    directions: &[Direction],
    shots: usize,
    sites: &[usize],
    seed: u64,
) -> Result<Vec<ShotRecord>, MeasureError> {
    if sites.is_empty() {
        return Err(MeasureError::EmptySelection);
    }
    let n_spins = state.basis.n_spins();
    let mut located = Vec::with_capacity(sites.len());
    for (i, &s) in sites.iter().enumerate() {
        if sites[..i].contains(&s) {
            return Err(MeasureError::DuplicateSite(s));
        }
        located.push(state.basis.locate_site(s).ok_or(MeasureError::SiteOutOfRange { site: s, n_spins })?);
    }
    let jobs: Vec<(usize, Direction)> = directions.iter().copied().enumerate().collect();
    let per_direction = par::map(jobs, |(d, dir)| {
        let rotated = rotate_to_direction(state, dir.unit());
        let mut cdf = Vec::with_capacity(rotated.dim());
        let mut acc = 0.0;
        for a in &rotated.amplitudes {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        let mut rng = direction_rng(seed, d as u64);
        let sizes: Vec<usize> = state.basis.groups().iter().map(Vec::len).collect();
        (0..shots)
            .map(|shot| {
                let u = rng.random::<f64>() * acc;
                let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                let (occ, _) = state.basis.decode(idx);
                // excited positions inside each ladder
                let excited: Vec<Vec<usize>> = occ
                    .iter()
                    .zip(&sizes)
                    .map(|(&m, &n)| if m == 0 { Vec::new() } else { sample(&mut rng, n, m).into_vec() })
                    .collect();
                let outcomes = located.iter().map(|&(j, p)| u8::from(excited[j].contains(&p))).collect();
                ShotRecord {
                    direction_index: d,
                    direction: dir,
                    shot_index: d * shots + shot,
                    rng_seed: seed,
                    sites: sites.to_vec(),
                    outcomes,
                }
            })
            .collect::<Vec<_>>()
    });
    Ok(per_direction.into_iter().flatten().collect())
}
