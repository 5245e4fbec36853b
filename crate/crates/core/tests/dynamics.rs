mod common;

use common::{dense_propagate, fidelity, random_model};
use dicke_core::engine::{
    adapt_truncation, b0_oracle_state, evolve, evolve_grid, initial_state, EchoPropagator, EvolutionConfig, SpinDirection,
};
use dicke_core::measure::reduced_dm_boson;
use dicke_core::model::{DimensionCap, Model, ModelParams, SiteCoupling};
use dicke_core::tomo::{von_neumann_entropy, DensityMatrix, DmBasis};
use dicke_core::{khz_to_angular, Axis};

#[test]
fn krylov_matches_dense_eigendecomposition() {
    let mut p = random_model(4, 0.3, 0, 11);
    p.n_max = adapt_truncation(&Model::Full(p.clone()), 1e-3, None, 1e-8);
    let model = Model::Full(p);
    let h = model.hamiltonian(DimensionCap::default()).unwrap();
    assert!(h.dim() <= 2048, "dimension {}", h.dim());
    let s0 = initial_state(&h.basis, SpinDirection::PlusY);
    let s = evolve(&s0, &h, 1e-3, &EvolutionConfig::default()).unwrap();
    let exact = dense_propagate(&h.matrix, &s0.amplitudes, 1e-3);
    assert!(fidelity(&s.amplitudes, &exact) >= 1.0 - 1e-8);
}

#[test]
fn zero_field_evolution_matches_the_oracle() {
    let mut p = random_model(3, 0.0, 0, 5);
    p.n_max = adapt_truncation(&Model::Full(p.clone()), 0.7e-3, None, 1e-12);
    let h = Model::Full(p.clone()).hamiltonian(DimensionCap::default()).unwrap();
    let s0 = initial_state(&h.basis, SpinDirection::PlusX);
    let s = evolve(&s0, &h, 0.7e-3, &EvolutionConfig::default()).unwrap();
    let oracle = b0_oracle_state(&p, SpinDirection::PlusX, 0.7e-3).unwrap();
    assert!(s.fidelity(&oracle) >= 1.0 - 1e-8, "{}", 1.0 - s.fidelity(&oracle));
}

#[test]
fn decoupled_boson_stays_in_vacuum() {
    let mut p = random_model(3, 0.5, 6, 2);
    p.eta = 0.0;
    let h = Model::Full(p).hamiltonian(DimensionCap::default()).unwrap();
    let s0 = initial_state(&h.basis, SpinDirection::MinusX);
    let s = evolve(&s0, &h, 2e-3, &EvolutionConfig::default()).unwrap();
    let pops = s.fock_populations();
    assert!((pops[0] - 1.0).abs() < 1e-10);
}

#[test]
fn norm_and_energy_are_conserved() {
    let mut p = random_model(5, 0.09, 0, 8);
    p.n_max = adapt_truncation(&Model::Full(p.clone()), 2e-3, None, 1e-8);
    let h = Model::Full(p).hamiltonian(DimensionCap::default()).unwrap();
    let s0 = initial_state(&h.basis, SpinDirection::PlusX);
    let e0 = h.matrix.expectation(&s0.amplitudes).re;
    let cfg = EvolutionConfig::with_grid(0.5e-3, 2e-3);
    let scale = h.matrix.norm_bound();
    for s in evolve_grid(&s0, &h, &cfg).unwrap() {
        assert!((s.norm() - 1.0).abs() <= 1e-9);
        assert!((h.matrix.expectation(&s.amplitudes).re - e0).abs() <= 1e-8 * scale);
    }
}

fn boson_entropy(s: &dicke_core::engine::StateVector) -> f64 {
    let rho = reduced_dm_boson(s);
    von_neumann_entropy(&DensityMatrix::new(DmBasis::Full, rho)).unwrap()
}

#[test]
fn echo_returns_the_boson_to_vacuum_at_loop_closure() {
    let delta = khz_to_angular(0.5);
    let n = 4;
    let p = ModelParams {
        eta: 0.05,
        delta,
        b_field: 0.0,
        sites: vec![SiteCoupling { omega: khz_to_angular(5.0), b: 0.5, phi: 0.0 }; n],
        n_max: 0,
    };
    let t_total = 2.0 * (2.0 * std::f64::consts::PI / delta);
    let echo = dicke_core::engine::EchoSchedule::default();
    let n_max = adapt_truncation(&Model::Full(p.clone()), t_total, Some(echo), 1e-10);
    let model = Model::Full(ModelParams { n_max, ..p });
    let prop = EchoPropagator::new(&model, Axis::X, DimensionCap::default()).unwrap();
    let s0 = initial_state(&model.basis(), SpinDirection::PlusZ);
    let end = prop.run(&s0, t_total, &EvolutionConfig::default()).unwrap();
    assert!(boson_entropy(&end) <= 1e-6);
    assert!((end.fock_populations()[0] - 1.0).abs() < 1e-8);
    // mid-loop without echo the polarized state is displaced
    let h = model.hamiltonian(DimensionCap::default()).unwrap();
    let mid = evolve(&s0, &h, 0.5 * std::f64::consts::PI / delta * 2.0, &EvolutionConfig::default()).unwrap();
    assert!(mid.fock_populations()[0] < 0.5);
}
