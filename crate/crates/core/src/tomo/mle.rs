//! RρR maximum-likelihood iteration.
//!
//! Each distinct outcome j of each measurement direction contributes a
//! rank-1 projector Π_j = |w_j⟩⟨w_j| and an empirical frequency f_j. The
//! iterate is ρ ← R ρ R / Tr(R ρ R) with R = Σ_j (f_j / p_j) Π_j. Each
//! iteration also tries the diluted operator (I + εR)/(1 + ε) with
//! ε = 0.01 and keeps whichever step reaches the higher log-likelihood
//! Σ f_j ln p_j; if both would lower it, ε is halved until it does not.

use super::{DensityMatrix, DmBasis, TomoError};
use crate::linalg::{ladder_rotation, qubit_rotation, rotation_to_z};
use crate::measure::{Direction, ShotRecord};
use crate::C64;
use nalgebra::{DMatrix, DVector};
use std::collections::BTreeMap;

/// Largest k accepted by [`mle_full`].
pub const FULL_TOMO_CAP: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    pub max_iterations: usize,
    /// Stop when no entry of ρ moves by more than this.
    pub tolerance: f64,
    pub dilution: f64,
    pub probability_floor: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self { max_iterations: 10_000, tolerance: 1e-10, dilution: 0.01, probability_floor: 1e-12 }
    }
}

/// Counted outcomes grouped by direction, ready for reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct TomoData {
    pub directions: Vec<Direction>,
    /// Per direction: outcome label (bitstring as an integer, first site
    /// most significant) → count.
    pub counts: Vec<BTreeMap<usize, usize>>,
    pub n_sites: usize,
}

impl TomoData {
    /// Groups records by direction index. Indices must run 0..D without gaps.
    pub fn from_records(records: &[ShotRecord]) -> Result<Self, TomoError> {
        let first = records.first().ok_or(TomoError::NoRecords)?;
        let k = first.sites.len();
        let n_dirs = records.iter().map(|r| r.direction_index).max().unwrap() + 1;
        let mut directions: Vec<Option<Direction>> = vec![None; n_dirs];
        let mut counts = vec![BTreeMap::new(); n_dirs];
        for r in records {
            if r.sites != first.sites || r.outcomes.len() != k {
                return Err(TomoError::InconsistentRecords("site selection".into()));
            }
            match directions[r.direction_index] {
                None => directions[r.direction_index] = Some(r.direction),
                Some(d) if d != r.direction => {
                    return Err(TomoError::InconsistentRecords(format!("direction {}", r.direction_index)))
                }
                _ => {}
            }
            let label = r.outcomes.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            *counts[r.direction_index].entry(label).or_insert(0) += 1;
        }
        let directions = directions
            .into_iter()
            .enumerate()
            .map(|(d, dir)| dir.ok_or(TomoError::DegenerateData { direction: d }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { directions, counts, n_sites: k })
    }

    /// Explicit directions and counts; a direction without shots is an error.
    pub fn from_counts(directions: Vec<Direction>, counts: Vec<BTreeMap<usize, usize>>, n_sites: usize) -> Result<Self, TomoError> {
        if directions.is_empty() {
            return Err(TomoError::NoRecords);
        }
        if directions.len() != counts.len() {
            return Err(TomoError::InconsistentRecords("direction count".into()));
        }
        for (d, c) in counts.iter().enumerate() {
            if c.values().sum::<usize>() == 0 {
                return Err(TomoError::DegenerateData { direction: d });
            }
        }
        Ok(Self { directions, counts, n_sites })
    }

    pub fn total_shots(&self) -> usize {
        self.counts.iter().flat_map(|c| c.values()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomoResult {
    pub rho: DensityMatrix,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood after every iteration, starting with the initial iterate.
    pub likelihood_history: Vec<f64>,
    pub warnings: Vec<String>,
}

struct Projector {
    w: DVector<C64>,
    freq: f64,
}

fn rotation_for(dir: &Direction, k: usize, dicke: bool) -> DMatrix<C64> {
    let (axis, angle) = rotation_to_z(dir.unit());
    if dicke {
        ladder_rotation(k, axis, angle)
    } else {
        qubit_rotation(axis, angle)
    }
}

/// Symmetric-subspace reconstruction: outcomes with q excitations are
/// counted as the rotated Dicke projector U†|q⟩⟨q|U.
pub fn mle_dicke(records: &[ShotRecord], k: usize, options: &MleOptions) -> Result<TomoResult, TomoError> {
    let data = TomoData::from_records(records)?;
    if data.n_sites != k {
        return Err(TomoError::InconsistentRecords(format!("records cover {} sites, expected {k}", data.n_sites)));
    }
    mle_dicke_data(&data, options)
}

pub fn mle_dicke_data(data: &TomoData, options: &MleOptions) -> Result<TomoResult, TomoError> {
    let k = data.n_sites;
    let total = data.total_shots() as f64;
    let mut projectors = Vec::new();
    for (dir, counts) in data.directions.iter().zip(&data.counts) {
        let u = rotation_for(dir, k, true);
        let mut per_q = vec![0usize; k + 1];
        for (&label, &c) in counts {
            per_q[label.count_ones() as usize] += c;
        }
        for (q, &c) in per_q.iter().enumerate() {
            if c > 0 {
                let w = DVector::from_fn(k + 1, |r, _| u[(q, r)].conj());
                projectors.push(Projector { w, freq: c as f64 / total });
            }
        }
    }
    let mut warnings = Vec::new();
    let distinct = data.directions.len() * (k + 1);
    if distinct < (k + 1) * (k + 1) {
        warnings.push(format!("only {distinct} projectors for a {}-dimensional state: reconstruction is underdetermined", k + 1));
    }
    Ok(iterate(DmBasis::Dicke, k + 1, &projectors, options, warnings))
}

/// Site-resolved reconstruction on the 2^k basis, k ≤ [`FULL_TOMO_CAP`].
pub fn mle_full(records: &[ShotRecord], k: usize, options: &MleOptions) -> Result<TomoResult, TomoError> {
    if k > FULL_TOMO_CAP {
        return Err(TomoError::SubsystemTooLarge { k, max: FULL_TOMO_CAP });
    }
    let data = TomoData::from_records(records)?;
    if data.n_sites != k {
        return Err(TomoError::InconsistentRecords(format!("records cover {} sites, expected {k}", data.n_sites)));
    }
    mle_full_data(&data, options)
}

pub fn mle_full_data(data: &TomoData, options: &MleOptions) -> Result<TomoResult, TomoError> {
    let k = data.n_sites;
    if k > FULL_TOMO_CAP {
        return Err(TomoError::SubsystemTooLarge { k, max: FULL_TOMO_CAP });
    }
    let dim = 1usize << k;
    let total = data.total_shots() as f64;
    let mut projectors = Vec::new();
    for (dir, counts) in data.directions.iter().zip(&data.counts) {
        let u = rotation_for(dir, 1, false);
        for (&label, &c) in counts {
            // ⊗_i U†|x_i⟩, first site most significant
            let w = DVector::from_fn(dim, |r, _| {
                (0..k).fold(C64::new(1.0, 0.0), |acc, i| {
                    let shift = k - 1 - i;
                    acc * u[((label >> shift) & 1, (r >> shift) & 1)].conj()
                })
            });
            projectors.push(Projector { w, freq: c as f64 / total });
        }
    }
    let mut warnings = Vec::new();
    let distinct = data.directions.len() * dim;
    if distinct < dim * dim {
        warnings.push(format!("only {distinct} projectors for a {dim}-dimensional state: reconstruction is underdetermined"));
    }
    Ok(iterate(DmBasis::Full, dim, &projectors, options, warnings))
}

fn probabilities(rho: &DMatrix<C64>, projectors: &[Projector], floor: f64) -> Vec<f64> {
    projectors.iter().map(|p| (p.w.adjoint() * rho * &p.w)[(0, 0)].re.max(floor)).collect()
}

fn log_likelihood(rho: &DMatrix<C64>, projectors: &[Projector], floor: f64) -> f64 {
    probabilities(rho, projectors, floor).iter().zip(projectors).map(|(p, pr)| pr.freq * p.ln()).sum()
}

fn apply(r: &DMatrix<C64>, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let m = r * rho * r;
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let tr = m.trace().re;
    m / C64::new(tr, 0.0)
}

fn iterate(basis: DmBasis, dim: usize, projectors: &[Projector], o: &MleOptions, warnings: Vec<String>) -> TomoResult {
    let mut rho = DensityMatrix::maximally_mixed(basis, dim).matrix;
    let mut ll = log_likelihood(&rho, projectors, o.probability_floor);
    let mut history = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    let eye = DMatrix::<C64>::identity(dim, dim);
    while iterations < o.max_iterations {
        iterations += 1;
        let p = probabilities(&rho, projectors, o.probability_floor);
        let mut r = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for (pj, pr) in p.iter().zip(projectors) {
            r += (&pr.w * pr.w.adjoint()) * C64::new(pr.freq / pj, 0.0);
        }
        let dilute = |eps: f64| apply(&((&eye + &r * C64::new(eps, 0.0)) / C64::new(1.0 + eps, 0.0)), &rho);
        // the plain step can oscillate around the optimum without gaining
        // likelihood, so it competes with the diluted step
        let mut next = apply(&r, &rho);
        let mut next_ll = log_likelihood(&next, projectors, o.probability_floor);
        let mut eps = o.dilution;
        let diluted = dilute(eps);
        let diluted_ll = log_likelihood(&diluted, projectors, o.probability_floor);
        if diluted_ll > next_ll {
            next = diluted;
            next_ll = diluted_ll;
        }
        while next_ll < ll && eps > 1e-12 {
            eps *= 0.5;
            next = dilute(eps);
            next_ll = log_likelihood(&next, projectors, o.probability_floor);
        }
        if next_ll < ll {
            // no improving step exists at working precision
            converged = true;
            break;
        }
        let change = (&next - &rho).iter().map(|z| z.norm()).fold(0.0, f64::max);
        rho = next;
        ll = next_ll;
        history.push(ll);
        if change <= o.tolerance {
            converged = true;
            break;
        }
    }
    TomoResult {
        rho: DensityMatrix::new(basis, rho),
        log_likelihood: ll,
        iterations,
        converged,
        likelihood_history: history,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{initial_state, SpinDirection};
    use crate::measure::{random_directions, sample_shots};
    use crate::tomo::{pure_state_fidelity, von_neumann_entropy};
    use crate::Basis;

    #[test]
    fn single_direction_warns_and_stays_diagonal_consistent() {
        let b = Basis::subensemble(vec![vec![0, 1]], 0);
        let s = initial_state(&b, SpinDirection::PlusX);
        let dir = Direction { theta: 0.0, phi: 0.0 };
        let recs = sample_shots(&s, &[dir], 400, &[0, 1], 3).unwrap();
        let res = mle_dicke(&recs, 2, &MleOptions::default()).unwrap();
        assert!(!res.warnings.is_empty());
        // diagonal reproduces the observed excitation frequencies
        let mut freq = [0.0; 3];
        for r in &recs {
            freq[r.outcomes.iter().map(|&x| x as usize).sum::<usize>()] += 1.0 / 400.0;
        }
        for q in 0..3 {
            assert!((res.rho.matrix[(q, q)].re - freq[q]).abs() < 1e-6);
        }
        assert!(res.likelihood_history.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn product_state_full_reconstruction() {
        // |01⟩
        let b = Basis::full(2, 0);
        let mut s = initial_state(&b, SpinDirection::PlusZ);
        s.amplitudes.iter_mut().for_each(|a| *a = C64::new(0.0, 0.0));
        s.amplitudes[0b01] = C64::new(1.0, 0.0);
        let dirs = random_directions(25, 1);
        let recs = sample_shots(&s, &dirs, 400, &[0, 1], 2).unwrap();
        let res = mle_full(&recs, 2, &MleOptions::default()).unwrap();
        let target = [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        assert!(pure_state_fidelity(&res.rho, &target) >= 0.99);
        assert!(res.likelihood_history.windows(2).all(|w| w[1] >= w[0]));
        assert!(von_neumann_entropy(&res.rho).is_ok());
    }

    #[test]
    fn errors() {
        assert!(matches!(mle_dicke(&[], 1, &MleOptions::default()), Err(TomoError::NoRecords)));
        let b = Basis::full(1, 0);
        let s = initial_state(&b, SpinDirection::PlusZ);
        let mut recs = sample_shots(&s, &random_directions(2, 0), 3, &[0], 0).unwrap();
        for r in &mut recs {
            if r.direction_index == 1 {
                r.direction_index = 2;
            }
        }
        assert!(matches!(mle_dicke(&recs, 1, &MleOptions::default()), Err(TomoError::DegenerateData { direction: 1 })));
        assert!(matches!(mle_full(&recs, 5, &MleOptions::default()), Err(TomoError::SubsystemTooLarge { .. })));
        let empty = TomoData::from_counts(vec![Direction { theta: 0.0, phi: 0.0 }], vec![BTreeMap::new()], 1);
        assert!(matches!(empty, Err(TomoError::DegenerateData { direction: 0 })));
    }
}
