#![allow(dead_code)]

use dicke_core::engine::StateVector;
use dicke_core::linalg::hermitian_function;
use dicke_core::model::{ModelParams, SiteCoupling};
use dicke_core::{khz_to_angular, SparseOperator, C64};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Nonuniform model with couplings near the experimental scale.
pub fn random_model(n: usize, b_khz: f64, n_max: usize, seed: u64) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sites = (0..n)
        .map(|_| SiteCoupling {
            omega: khz_to_angular(rng.random_range(3.0..6.0)),
            b: rng.random_range(0.5..1.0) / (n as f64).sqrt(),
            phi: rng.random_range(0.0..std::f64::consts::TAU),
        })
        .collect();
    ModelParams { eta: 0.05, delta: khz_to_angular(0.5), b_field: khz_to_angular(b_khz), sites, n_max }
}

/// exp(−iHt)v by dense diagonalization.
pub fn dense_propagate(h: &SparseOperator, v: &[C64], t: f64) -> Vec<C64> {
    let u = hermitian_function(&h.to_dense(), |l| C64::from_polar(1.0, -l * t));
    (u * DVector::from_column_slice(v)).iter().copied().collect()
}

pub fn fidelity(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>().norm_sqr()
}

/// ⟨σ_axis⟩ of one site of a full-basis state, computed bit by bit.
pub fn site_pauli_full(state: &StateVector, site: usize, axis: char) -> f64 {
    let n = state.basis.n_spins();
    let f = state.basis.fock_dim();
    let mask = 1usize << (n - 1 - site);
    let mut acc = 0.0;
    for (i, a) in state.amplitudes.iter().enumerate() {
        let bits = i / f;
        let up = bits & mask == 0;
        match axis {
            'z' => acc += if up { a.norm_sqr() } else { -a.norm_sqr() },
            'x' => acc += (state.amplitudes[(bits ^ mask) * f + i % f].conj() * a).re,
            'y' => {
                // σ_y|0⟩ = i|1⟩, σ_y|1⟩ = −i|0⟩
                let phase = if up { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) };
                acc += (state.amplitudes[(bits ^ mask) * f + i % f].conj() * phase * a).re;
            }
            _ => unreachable!(),
        }
    }
    acc
}
