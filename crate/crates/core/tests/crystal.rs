use dicke_core::crystal::{potential_energy, select_mode, solve_equilibrium, transverse_modes, ModeSelector, TrapConfig};
use dicke_core::khz_to_angular;

fn trap(n: usize, (x, y, z): (f64, f64, f64)) -> TrapConfig {
    TrapConfig {
        omega_x: khz_to_angular(x),
        omega_y: khz_to_angular(y),
        omega_z: khz_to_angular(z),
        n_ions: n,
    }
}

#[test]
fn large_planar_crystal_mode_spectrum() {
    let t = trap(200, (540.0, 1960.0, 100.0));
    let sol = solve_equilibrium(&t, 1).unwrap();
    assert!(sol.converged);
    let table = transverse_modes(&t, &sol).unwrap();
    assert_eq!(table.len(), 200);
    assert!(table.orthonormality_error() < 1e-8);
    let (w, v) = select_mode(&table, ModeSelector::Com).unwrap();
    assert!((w - t.omega_y).abs() <= 1e-10 * t.omega_y);
    let u = 1.0 / 200f64.sqrt();
    assert!(v.iter().all(|x| (x - u).abs() <= 1e-8));
    // trace rule: Σω_k² = N ω_y² − ω_z² Σ_{i≠j} 1/r_ij³ with r in units of ℓ
    let sum: f64 = table.frequencies.iter().map(|w| w * w).sum();
    let mut coulomb = 0.0;
    for (i, a) in sol.positions.iter().enumerate() {
        for b in &sol.positions[i + 1..] {
            coulomb += 2.0 / ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).powf(1.5);
        }
    }
    let trace = 200.0 * t.omega_y.powi(2) - t.omega_z.powi(2) * coulomb;
    assert!((sum - trace).abs() <= 1e-8 * sum);
    // mode 2 is a tilt-like pattern with both signs
    let (_, v2) = select_mode(&table, ModeSelector::Index(2)).unwrap();
    assert!(v2.iter().any(|&x| x > 0.05) && v2.iter().any(|&x| x < -0.05));
}

#[test]
fn equilibrium_energy_is_rotation_invariant_in_a_round_trap() {
    let t = trap(7, (150.0, 1900.0, 150.0));
    let sol = solve_equilibrium(&t, 3).unwrap();
    let e = potential_energy(&t, &sol.positions);
    for angle in [0.3f64, 1.1, 2.5] {
        let (s, c) = angle.sin_cos();
        let rotated: Vec<[f64; 2]> = sol.positions.iter().map(|p| [c * p[0] - s * p[1], s * p[0] + c * p[1]]).collect();
        assert!((potential_energy(&t, &rotated) - e).abs() <= 1e-10 * e.abs());
    }
}
