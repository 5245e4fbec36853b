mod common;

use common::random_model;
use dicke_core::engine::{adapt_truncation, evolve, initial_state, SpinDirection};
use dicke_core::measure::{
    expect_pauli, random_directions, reduced_dm_sites, rotate_to_direction, sample_shots, sample_total_spin,
    total_spin_distribution, Direction, Scope,
};
use dicke_core::model::{DimensionCap, Model, SubensembleModel, SubensembleSpec};
use dicke_core::tomo::{
    mle_dicke, mle_full, pure_state_fidelity, trace_distance, MleOptions,
};
use dicke_core::{Axis, C64};

fn evolved_subensemble(seed: u64) -> dicke_core::engine::StateVector {
    let mut p = random_model(6, 0.3, 0, seed);
    p.n_max = adapt_truncation(&Model::Full(p.clone()), 1.5e-3, None, 1e-8);
    let model = Model::Subensemble(SubensembleModel {
        spec: SubensembleSpec::from_partition(&p, vec![vec![0, 1, 2], vec![3, 4, 5]]),
        delta: p.delta,
        b_field: p.b_field,
        n_max: p.n_max,
    });
    let h = model.hamiltonian(DimensionCap::default()).unwrap();
    evolve(&initial_state(&h.basis, SpinDirection::PlusX), &h, 1.5e-3, &Default::default()).unwrap()
}

#[test]
fn sampled_magnetization_is_within_three_sigma() {
    let state = evolved_subensemble(31);
    let shots = 20_000;
    for axis in Axis::ALL {
        let d = Direction::from_unit(axis.unit());
        let records = sample_shots(&state, &[d], shots, &[0, 4], 9).unwrap();
        for (slot, site) in [0usize, 4].into_iter().enumerate() {
            let exact = expect_pauli(&state, axis, Scope::Site(site)).unwrap();
            let p1 = (1.0 - exact) / 2.0;
            let ones = records.iter().filter(|r| r.outcomes[slot] == 1).count() as f64 / shots as f64;
            let sigma = (p1 * (1.0 - p1) / shots as f64).sqrt().max(1e-9);
            assert!((ones - p1).abs() <= 3.0 * sigma, "{axis:?} site {site}: {ones} vs {p1}");
        }
    }
}

#[test]
fn total_spin_distribution_is_rotation_invariant() {
    let state = evolved_subensemble(4);
    let along_x = total_spin_distribution(&state, Axis::X);
    let rotated = rotate_to_direction(&state, [1.0, 0.0, 0.0]);
    let along_z = total_spin_distribution(&rotated, Axis::Z);
    for (a, b) in along_x.probabilities.iter().zip(&along_z.probabilities) {
        assert!((a - b).abs() <= 1e-10);
    }
    assert!((along_x.total() - 1.0).abs() <= 1e-9);
    let sampled = sample_total_spin(&state, Axis::X, 50_000, 2);
    for (p, q) in along_x.probabilities.iter().zip(&sampled.probabilities) {
        let sigma = (p * (1.0 - p) / 50_000.0).sqrt();
        assert!((p - q).abs() <= 3.0 * sigma + 1e-12);
    }
}

#[test]
fn large_budget_reconstruction_approaches_the_true_reduced_state() {
    let state = evolved_subensemble(17);
    let dirs = random_directions(25, 3);
    let opts = MleOptions::default();
    // two sites in one ladder: symmetric reconstruction
    let truth = reduced_dm_sites(&state, &[0, 1]).unwrap();
    let records = sample_shots(&state, &dirs, 4000, &[0, 1], 5).unwrap();
    let dicke = mle_dicke(&records, 2, &opts).unwrap();
    assert!(trace_distance(&dicke.rho.to_full(), &truth) < 0.02);
    // sites across ladders: site-resolved reconstruction
    let truth = reduced_dm_sites(&state, &[2, 3]).unwrap();
    let records = sample_shots(&state, &dirs, 4000, &[2, 3], 6).unwrap();
    let full = mle_full(&records, 2, &opts).unwrap();
    assert!(trace_distance(&full.rho, &truth) < 0.02);
    for r in [&dicke, &full] {
        assert!(r.likelihood_history.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(r.rho.eigenvalues().iter().all(|&l| l >= -1e-10));
        assert!((r.rho.trace() - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn product_state_round_trip() {
    // |0⟩|1⟩ on two sites of a three-site product state
    let basis = dicke_core::Basis::full(3, 0);
    let mut s = dicke_core::engine::StateVector::zeros(basis);
    s.amplitudes[0b010] = C64::new(1.0, 0.0);
    let dirs = random_directions(16, 8);
    let records = sample_shots(&s, &dirs, 625, &[0, 1], 1).unwrap();
    let r = mle_full(&records, 2, &MleOptions::default()).unwrap();
    let psi = [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    assert!(pure_state_fidelity(&r.rho, &psi) >= 0.99);
}
