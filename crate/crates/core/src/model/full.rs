use super::{DimensionCap, HamiltonianOperator, ModelError, ModelParams};
use crate::{SparseOperator, C64};

/// Builds the site-resolved Hamiltonian on 2^N · (n_max + 1) states.
///
/// Index layout: `bits · (n_max + 1) + n`, site 0 in the most significant
/// bit, bit 0 ↔ |0⟩ ↔ σ_z = +1.
pub fn build_full_hamiltonian(params: &ModelParams, cap: DimensionCap) -> Result<HamiltonianOperator, ModelError> {
    params.validate()?;
    let n_spins = params.n_spins();
    if n_spins >= usize::BITS as usize - 1 {
        return Err(ModelError::DimensionCapExceeded { dim: usize::MAX, cap: cap.0 });
    }
    let basis = params.basis();
    let dim = cap.check(&basis)?;
    let fock = params.n_max + 1;
    let couplings = params.couplings();
    let n_states = 1usize << n_spins;

    let mut triplets = Vec::with_capacity(dim * (3 + n_spins));
    for bits in 0..n_states {
        // coefficient of `a` in this σ_z sector: Σ_i z_i (1 + s_i)
        let drive: C64 = (0..n_spins)
            .filter(|&i| bits & (1 << (n_spins - 1 - i)) == 0)
            .map(|i| couplings[i] * 2.0)
            .sum();
        for n in 0..fock {
            let row = bits * fock + n;
            if n > 0 {
                triplets.push((row, row, C64::new(-params.delta * n as f64, 0.0)));
            }
            if n + 1 < fock {
                let amp = ((n + 1) as f64).sqrt();
                // <n|a|n+1> and <n+1|a†|n>
                triplets.push((row, row + 1, drive * amp));
                triplets.push((row + 1, row, drive.conj() * amp));
            }
            if params.b_field != 0.0 {
                for i in 0..n_spins {
                    let flipped = bits ^ (1 << (n_spins - 1 - i));
                    triplets.push((flipped * fock + n, row, C64::new(params.b_field, 0.0)));
                }
            }
        }
    }
    Ok(HamiltonianOperator { basis, matrix: SparseOperator::from_triplets(dim, triplets) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SiteCoupling;
    use crate::khz_to_angular;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
        a.kronecker(b)
    }

    fn eye(n: usize) -> DMatrix<C64> {
        DMatrix::identity(n, n)
    }

    /// Operator `op` on site `i` of `n` spins, tensored with the Fock identity.
    fn site_op(op: &DMatrix<C64>, i: usize, n: usize, fock: usize) -> DMatrix<C64> {
        let two = eye(2);
        let mut m = eye(1);
        for k in 0..n {
            m = kron(&m, if k == i { op } else { &two });
        }
        kron(&m, &eye(fock))
    }

    fn annihilation(fock: usize) -> DMatrix<C64> {
        DMatrix::from_fn(fock, fock, |r, c| if c == r + 1 { C64::new((c as f64).sqrt(), 0.0) } else { C64::new(0.0, 0.0) })
    }

    /// Independent dense construction of each term.
    fn dense_reference(p: &ModelParams) -> DMatrix<C64> {
        let n = p.n_spins();
        let fock = p.n_max + 1;
        let sz = DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]);
        let sx = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let spin_eye = eye(1 << n);
        let a = kron(&spin_eye, &annihilation(fock));
        let ad = a.adjoint();
        let id = eye((1 << n) * fock);
        let mut h = &ad * &a * C64::new(-p.delta, 0.0);
        for (i, s) in p.sites.iter().enumerate() {
            let c = p.eta * s.b * s.omega;
            let force = &a * C64::from_polar(1.0, s.phi) + &ad * C64::from_polar(1.0, -s.phi);
            h += (&id + site_op(&sz, i, n, fock)) * force * C64::new(c, 0.0);
            h += site_op(&sx, i, n, fock) * C64::new(p.b_field, 0.0);
        }
        h
    }

    fn random_params(n: usize, n_max: usize, seed: u64) -> ModelParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ModelParams {
            eta: 0.05,
            delta: khz_to_angular(0.5),
            b_field: khz_to_angular(0.3),
            sites: (0..n)
                .map(|_| SiteCoupling {
                    omega: khz_to_angular(rng.random_range(1.0..6.0)),
                    b: rng.random_range(-0.8..0.8),
                    phi: rng.random_range(0.0..std::f64::consts::TAU),
                })
                .collect(),
            n_max,
        }
    }

    #[test]
    fn decoupled_spin_has_eigenvalues_plus_minus_b() {
        let b = khz_to_angular(0.5);
        let p = ModelParams {
            eta: 0.0,
            delta: 0.0,
            b_field: b,
            sites: vec![SiteCoupling { omega: 1.0, b: 1.0, phi: 0.0 }],
            n_max: 0,
        };
        let h = build_full_hamiltonian(&p, DimensionCap::default()).unwrap();
        let ev = crate::linalg::hermitian_eigenvalues(&h.matrix.to_dense());
        assert!((ev[0] + b).abs() < 1e-9 && (ev[1] - b).abs() < 1e-9);
    }

    #[test]
    fn free_boson_is_diagonal() {
        let d = khz_to_angular(0.5);
        let p = ModelParams {
            eta: 0.0,
            delta: d,
            b_field: 0.0,
            sites: vec![SiteCoupling { omega: 0.0, b: 0.5, phi: 0.0 }; 2],
            n_max: 3,
        };
        let h = build_full_hamiltonian(&p, DimensionCap::default()).unwrap();
        let dense = h.matrix.to_dense();
        for r in 0..16 {
            for c in 0..16 {
                let expect = if r == c { -d * (r % 4) as f64 } else { 0.0 };
                assert!((dense[(r, c)] - C64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn matches_term_by_term_dense_construction() {
        let p = random_params(3, 8, 11);
        let h = build_full_hamiltonian(&p, DimensionCap::default()).unwrap();
        assert!(h.relative_hermiticity_residual() <= 1e-12);
        let reference = dense_reference(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let psi: Vec<C64> = (0..h.dim()).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let sparse = h.matrix.expectation(&psi);
            let v = nalgebra::DVector::from_vec(psi.clone());
            let dense = (v.adjoint() * &reference * &v)[(0, 0)];
            assert!((sparse - dense).norm() <= 1e-10 * dense.norm(), "{sparse} vs {dense}");
        }
        assert!((h.matrix.to_dense() - reference).norm() < 1e-9);
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let p = random_params(10, 10, 1);
        let err = build_full_hamiltonian(&p, DimensionCap(1000)).unwrap_err();
        assert!(matches!(err, ModelError::DimensionCapExceeded { dim: 11264, cap: 1000 }));
    }
}
