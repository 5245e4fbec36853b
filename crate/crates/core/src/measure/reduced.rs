//! Reduced density matrices.
//!
//! A Dicke state of a ladder with n spins and m excitations splits over k of
//! its spins and the remaining n − k as
//! |m⟩ = Σ_q √(C(k,q) C(n−k, m−q) / C(n,m)) |q⟩_k |m−q⟩_{n−k}.

use super::MeasureError;
use crate::engine::StateVector;
use crate::linalg::binomial;
use crate::tomo::{DensityMatrix, DmBasis};
use crate::{BasisKind, C64};
use nalgebra::DMatrix;

/// Largest site subsystem handled by [`reduced_dm_full`].
pub const DEFAULT_FULL_CAP: usize = 4;

fn split_weight(n: usize, k: usize, m: usize, q: usize) -> f64 {
    (binomial(k, q) * binomial(n - k, m - q) / binomial(n, m)).sqrt()
}

/// Reduced state of `k_j` spins taken from each listed ladder, expressed on
/// the product of their symmetric subspaces (index q_1, q_2, … with the
/// first listed ladder most significant).
fn partial_dicke(state: &StateVector, picks: &[(usize, usize)]) -> DMatrix<C64> {
    let dims = state.basis.axis_dims();
    let strides = state.basis.strides();
    let cols: Vec<usize> = picks.iter().map(|&(_, k)| k + 1).collect();
    let rests: Vec<usize> = picks.iter().map(|&(j, k)| dims[j] - k).collect();
    let n_cols: usize = cols.iter().product();
    let n_rest: usize = rests.iter().product();
    let others = state.dim() / picks.iter().map(|&(j, _)| dims[j]).product::<usize>();
    let mut picked = vec![false; dims.len()];
    for &(j, _) in picks {
        picked[j] = true;
    }
    let mut a = vec![C64::new(0.0, 0.0); others * n_rest * n_cols];
    for (i, &psi) in state.amplitudes.iter().enumerate() {
        if psi == C64::new(0.0, 0.0) {
            continue;
        }
        // index with the picked axes removed
        let mut reduced = 0;
        for a in 0..dims.len() {
            if !picked[a] {
                reduced = reduced * dims[a] + (i / strides[a]) % dims[a];
            }
        }
        let ms: Vec<usize> = picks.iter().map(|&(j, _)| (i / strides[j]) % dims[j]).collect();
        // enumerate the q tuples
        let mut q = vec![0usize; picks.len()];
        'tuples: loop {
            let mut ok = true;
            let mut w = psi;
            let mut col = 0;
            let mut rest = 0;
            for (p, &(j, k)) in picks.iter().enumerate() {
                let n = dims[j] - 1;
                let m = ms[p];
                if q[p] > m || m - q[p] > n - k {
                    ok = false;
                    break;
                }
                w *= split_weight(n, k, m, q[p]);
                col = col * cols[p] + q[p];
                rest = rest * rests[p] + (m - q[p]);
            }
            if ok {
                a[(reduced * n_rest + rest) * n_cols + col] += w;
            }
            for p in (0..picks.len()).rev() {
                q[p] += 1;
                if q[p] < cols[p] {
                    continue 'tuples;
                }
                q[p] = 0;
            }
            break;
        }
    }
    let mut rho = DMatrix::from_element(n_cols, n_cols, C64::new(0.0, 0.0));
    for row in a.chunks(n_cols) {
        for r in 0..n_cols {
            if row[r] == C64::new(0.0, 0.0) {
                continue;
            }
            for c in 0..n_cols {
                rho[(r, c)] += row[r] * row[c].conj();
            }
        }
    }
    rho
}

/// State of `k` spins of ladder `group` on their (k+1)-dimensional
/// symmetric subspace, index q = number of excitations.
pub fn reduced_dm_symmetric(state: &StateVector, group: usize, k: usize) -> Result<DensityMatrix, MeasureError> {
    let n = state.basis.group_size(group);
    if k == 0 || k > n {
        return Err(MeasureError::SubsystemTooLarge { k, max: n });
    }
    Ok(DensityMatrix::new(DmBasis::Dicke, partial_dicke(state, &[(group, k)])))
}

/// Embeds a (k+1)-dimensional symmetric-subspace state into the 2^k site basis.
pub fn symmetric_embedding(rho: &DensityMatrix) -> DensityMatrix {
    let k = rho.dim() - 1;
    let v = dicke_isometry(&[k]);
    DensityMatrix::new(DmBasis::Full, &v * &rho.matrix * v.adjoint())
}

/// Isometry from Π_p (k_p+1) symmetric labels to 2^{Σk_p} bitstrings, the
/// first block of bits belonging to the first factor.
pub fn dicke_isometry(ks: &[usize]) -> DMatrix<C64> {
    let total: usize = ks.iter().sum();
    let n_cols: usize = ks.iter().map(|k| k + 1).product();
    let mut v = DMatrix::from_element(1 << total, n_cols, C64::new(0.0, 0.0));
    for x in 0..(1usize << total) {
        let mut shift = total;
        let mut col = 0;
        let mut amp = 1.0;
        for &k in ks {
            shift -= k;
            let q = ((x >> shift) & ((1 << k) - 1)).count_ones() as usize;
            col = col * (k + 1) + q;
            amp /= binomial(k, q).sqrt();
        }
        v[(x, col)] = C64::new(amp, 0.0);
    }
    v
}

/// Exact reduced state of arbitrary sites on the 2^k site basis (first
/// listed site is the most significant bit). Works in either basis;
/// spins sharing a ladder are taken as exchangeable.
pub fn reduced_dm_sites(state: &StateVector, sites: &[usize]) -> Result<DensityMatrix, MeasureError> {
    if sites.is_empty() {
        return Err(MeasureError::EmptySelection);
    }
    if sites.len() > 12 {
        return Err(MeasureError::SubsystemTooLarge { k: sites.len(), max: 12 });
    }
    let n_spins = state.basis.n_spins();
    let mut located = Vec::new();
    for (i, &s) in sites.iter().enumerate() {
        if sites[..i].contains(&s) {
            return Err(MeasureError::DuplicateSite(s));
        }
        located.push(state.basis.locate_site(s).ok_or(MeasureError::SiteOutOfRange { site: s, n_spins })?.0);
    }
    // ladders in order of first appearance, with their pick counts
    let mut picks: Vec<(usize, usize)> = Vec::new();
    for &j in &located {
        match picks.iter_mut().find(|(g, _)| *g == j) {
            Some(p) => p.1 += 1,
            None => picks.push((j, 1)),
        }
    }
    let sym = partial_dicke(state, &picks);
    let v = dicke_isometry(&picks.iter().map(|p| p.1).collect::<Vec<_>>());
    let grouped = &v * sym * v.adjoint();
    // reorder bits from ladder-grouped order to the requested site order
    let k = sites.len();
    let mut slot_of = vec![0usize; k];
    let mut next = 0;
    for &(j, _) in &picks {
        for (i, &lj) in located.iter().enumerate() {
            if lj == j {
                slot_of[i] = next;
                next += 1;
            }
        }
    }
    let perm = |x: usize| -> usize {
        let mut y = 0;
        for i in 0..k {
            let bit = (x >> (k - 1 - i)) & 1;
            y |= bit << (k - 1 - slot_of[i]);
        }
        y
    };
    let dim = 1 << k;
    let m = DMatrix::from_fn(dim, dim, |r, c| grouped[(perm(r), perm(c))]);
    Ok(DensityMatrix::new(DmBasis::Full, m))
}

/// Partial trace of a full-basis state onto `sites`, at most [`DEFAULT_FULL_CAP`] of them.
pub fn reduced_dm_full(state: &StateVector, sites: &[usize]) -> Result<DensityMatrix, MeasureError> {
    reduced_dm_full_capped(state, sites, DEFAULT_FULL_CAP)
}

pub fn reduced_dm_full_capped(state: &StateVector, sites: &[usize], cap: usize) -> Result<DensityMatrix, MeasureError> {
    if state.basis.kind() != BasisKind::Full {
        return Err(MeasureError::BasisMismatch);
    }
    if sites.is_empty() {
        return Err(MeasureError::EmptySelection);
    }
    if sites.len() > cap {
        return Err(MeasureError::SubsystemTooLarge { k: sites.len(), max: cap });
    }
    let n = state.basis.n_spins();
    let f = state.basis.fock_dim();
    for (i, &s) in sites.iter().enumerate() {
        if s >= n {
            return Err(MeasureError::SiteOutOfRange { site: s, n_spins: n });
        }
        if sites[..i].contains(&s) {
            return Err(MeasureError::DuplicateSite(s));
        }
    }
    let k = sites.len();
    let masks: Vec<usize> = sites.iter().map(|&s| 1usize << (n - 1 - s)).collect();
    let all: usize = masks.iter().sum();
    let set = |base: usize, a: usize| -> usize {
        let mut x = base;
        for (i, &mk) in masks.iter().enumerate() {
            if (a >> (k - 1 - i)) & 1 == 1 {
                x |= mk;
            }
        }
        x
    };
    let dim = 1 << k;
    let mut rho = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for bits in 0..(1usize << n) {
        if bits & all != 0 {
            continue;
        }
        for fock in 0..f {
            let amp: Vec<C64> = (0..dim).map(|a| state.amplitudes[set(bits, a) * f + fock]).collect();
            for r in 0..dim {
                for c in 0..dim {
                    rho[(r, c)] += amp[r] * amp[c].conj();
                }
            }
        }
    }
    Ok(DensityMatrix::new(DmBasis::Full, rho))
}

/// Reduced state of the boson.
pub fn reduced_dm_boson(state: &StateVector) -> DMatrix<C64> {
    let f = state.basis.fock_dim();
    let mut rho = DMatrix::from_element(f, f, C64::new(0.0, 0.0));
    for slice in state.amplitudes.chunks(f) {
        for r in 0..f {
            if slice[r] == C64::new(0.0, 0.0) {
                continue;
            }
            for c in 0..f {
                rho[(r, c)] += slice[r] * slice[c].conj();
            }
        }
    }
    rho
}

/// Weight of a full-basis state outside the symmetric (S = N/2) subspace.
pub fn symmetric_leakage(state: &StateVector) -> Result<f64, MeasureError> {
    if state.basis.kind() != BasisKind::Full {
        return Err(MeasureError::BasisMismatch);
    }
    let n = state.basis.n_spins();
    let f = state.basis.fock_dim();
    let mut leak = 0.0;
    for fock in 0..f {
        let mut proj = vec![C64::new(0.0, 0.0); n + 1];
        let mut pop = vec![0.0; n + 1];
        for bits in 0..(1usize << n) {
            let a = state.amplitudes[bits * f + fock];
            let m = bits.count_ones() as usize;
            proj[m] += a;
            pop[m] += a.norm_sqr();
        }
        for m in 0..=n {
            leak += pop[m] - proj[m].norm_sqr() / binomial(n, m);
        }
    }
    Ok(leak.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{apply_global_rotation, initial_state, SpinDirection};
    use crate::tomo::von_neumann_entropy;
    use crate::Basis;

    #[test]
    fn product_state_reduces_to_a_pure_state() {
        let b = Basis::subensemble(vec![(0..5).collect(), (5..8).collect()], 1);
        let s = initial_state(&b, SpinDirection::PlusX);
        let rho = reduced_dm_symmetric(&s, 0, 2).unwrap();
        // |+x+x⟩ on the triplet: (1/2, 1/√2, 1/2)
        let v = [0.5, std::f64::consts::FRAC_1_SQRT_2, 0.5];
        for r in 0..3 {
            for c in 0..3 {
                assert!((rho.matrix[(r, c)] - C64::new(v[r] * v[c], 0.0)).norm() < 1e-13);
            }
        }
        assert!(von_neumann_entropy(&rho).unwrap().abs() < 1e-10);
        assert!(matches!(reduced_dm_symmetric(&s, 1, 4), Err(MeasureError::SubsystemTooLarge { .. })));
    }

    #[test]
    fn full_partial_trace_of_product_is_rank_one() {
        let b = Basis::full(4, 1);
        let mut s = initial_state(&b, SpinDirection::PlusY);
        apply_global_rotation(&mut s, [0.2, 0.4, 0.1], 0.7);
        let rho = reduced_dm_full(&s, &[3, 1]).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        let ev = crate::linalg::hermitian_eigenvalues(&rho.matrix);
        assert!((ev[3] - 1.0).abs() < 1e-12);
        let sub = Basis::subensemble(vec![vec![0, 1]], 0);
        assert!(matches!(reduced_dm_full(&initial_state(&sub, SpinDirection::PlusX), &[0]), Err(MeasureError::BasisMismatch)));
        assert!(matches!(reduced_dm_full(&s, &[0, 1, 2, 3, 0]), Err(MeasureError::SubsystemTooLarge { .. })));
    }

    #[test]
    fn site_reduction_in_full_basis_matches_partial_trace() {
        let b = Basis::full(4, 2);
        let mut s = StateVector::zeros(b.clone());
        for (i, a) in s.amplitudes.iter_mut().enumerate() {
            *a = C64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos());
        }
        s.normalize();
        let direct = reduced_dm_full(&s, &[2, 0, 3]).unwrap();
        let general = reduced_dm_sites(&s, &[2, 0, 3]).unwrap();
        assert!((direct.matrix - general.matrix).norm() < 1e-12);
    }

    #[test]
    fn boson_and_leakage_of_a_product() {
        let b = Basis::full(3, 2);
        let s = initial_state(&b, SpinDirection::PlusX);
        let rho = reduced_dm_boson(&s);
        assert!((rho[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!(symmetric_leakage(&s).unwrap() < 1e-15);
        let mut bad = StateVector::zeros(b);
        // (|01⟩ − |10⟩)/√2 on the first two spins
        bad.amplitudes[0b010 * 3] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        bad.amplitudes[0b100 * 3] = C64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0);
        assert!((symmetric_leakage(&bad).unwrap() - 1.0).abs() < 1e-14);
    }
}
