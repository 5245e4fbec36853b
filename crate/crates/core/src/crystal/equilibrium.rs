use super::{CrystalError, TrapConfig};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const GRADIENT_TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 10_000;
const STABILITY_TOLERANCE: f64 = -1e-9;

/// Equilibrium positions (x, z) in units of ℓ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrystalSolution {
    pub positions: Vec<[f64; 2]>,
    pub converged: bool,
    pub gradient_norm: f64,
    /// Potential energy in units of m ω_z² ℓ².
    pub energy: f64,
}

impl CrystalSolution {
    /// Positions in micrometres.
    pub fn positions_um(&self, trap: &TrapConfig) -> Vec<[f64; 2]> {
        let l = trap.length_scale() * 1e6;
        self.positions.iter().map(|p| [p[0] * l, p[1] * l]).collect()
    }
}

struct Potential {
    kx: f64,
}

impl Potential {
    fn energy(&self, q: &[f64]) -> f64 {
        let n = q.len() / 2;
        let mut e = 0.0;
        for i in 0..n {
            let (x, z) = (q[2 * i], q[2 * i + 1]);
            e += 0.5 * (self.kx * x * x + z * z);
            for j in i + 1..n {
                let dx = x - q[2 * j];
                let dz = z - q[2 * j + 1];
                e += 1.0 / (dx * dx + dz * dz).sqrt();
            }
        }
        e
    }

    fn gradient(&self, q: &[f64]) -> DVector<f64> {
        let n = q.len() / 2;
        let mut g = DVector::zeros(2 * n);
        for i in 0..n {
            g[2 * i] += self.kx * q[2 * i];
            g[2 * i + 1] += q[2 * i + 1];
            for j in i + 1..n {
                let dx = q[2 * i] - q[2 * j];
                let dz = q[2 * i + 1] - q[2 * j + 1];
                let r2 = dx * dx + dz * dz;
                let inv3 = 1.0 / (r2 * r2.sqrt());
                g[2 * i] -= dx * inv3;
                g[2 * i + 1] -= dz * inv3;
                g[2 * j] += dx * inv3;
                g[2 * j + 1] += dz * inv3;
            }
        }
        g
    }

    fn hessian(&self, q: &[f64]) -> DMatrix<f64> {
        let n = q.len() / 2;
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            h[(2 * i, 2 * i)] += self.kx;
            h[(2 * i + 1, 2 * i + 1)] += 1.0;
            for j in i + 1..n {
                let d = [q[2 * i] - q[2 * j], q[2 * i + 1] - q[2 * j + 1]];
                let r2 = d[0] * d[0] + d[1] * d[1];
                let r = r2.sqrt();
                let inv3 = 1.0 / (r2 * r);
                let inv5 = inv3 / r2;
                for u in 0..2 {
                    for v in 0..2 {
                        let k = 3.0 * d[u] * d[v] * inv5 - if u == v { inv3 } else { 0.0 };
                        h[(2 * i + u, 2 * i + v)] += k;
                        h[(2 * j + u, 2 * j + v)] += k;
                        h[(2 * i + u, 2 * j + v)] -= k;
                        h[(2 * j + u, 2 * i + v)] -= k;
                    }
                }
            }
        }
        h
    }
}

/// Hexagonal-shell lattice points with unit spacing, first neighbour along +z.
fn hexagonal_shells(n: usize) -> Vec<[f64; 2]> {
    let mut pts = vec![[0.0, 0.0]];
    let dirs: Vec<[f64; 2]> = (0..6)
        .map(|k| {
            let a = std::f64::consts::FRAC_PI_3 * k as f64;
            [a.sin(), a.cos()]
        })
        .collect();
    let mut shell = 1;
    while pts.len() < n {
        for side in 0..6 {
            let start = [dirs[side][0] * shell as f64, dirs[side][1] * shell as f64];
            let step = dirs[(side + 2) % 6];
            for t in 0..shell {
                pts.push([start[0] + step[0] * t as f64, start[1] + step[1] * t as f64]);
            }
        }
        shell += 1;
    }
    pts.truncate(n);
    pts
}

fn initial_guess(trap: &TrapConfig, seed: u64) -> Vec<[f64; 2]> {
    let n = trap.n_ions;
    let lattice = hexagonal_shells(n);
    let extent = lattice.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max).max(1.0);
    // rough radius of a planar crystal with the axial frequency as unit
    let rz = (1.5 * n as f64).cbrt();
    let rx = rz / trap.beta_x().powf(2.0 / 3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    lattice
        .into_iter()
        .map(|p| {
            let jitter = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            [
                p[0] / extent * rx + 1e-2 * rx / extent * jitter[0],
                p[1] / extent * rz + 1e-2 * rz / extent * jitter[1],
            ]
        })
        .collect()
}

/// Finds the planar equilibrium by damped Newton descent from a seeded
/// hexagonal-shell guess.
pub fn solve_equilibrium(trap: &TrapConfig, seed: u64) -> Result<CrystalSolution, CrystalError> {
    trap.validate()?;
    solve_equilibrium_from(trap, initial_guess(trap, seed))
}

/// Damped Newton descent from an explicit starting configuration.
pub fn solve_equilibrium_from(trap: &TrapConfig, start: Vec<[f64; 2]>) -> Result<CrystalSolution, CrystalError> {
    trap.validate()?;
    if start.len() != trap.n_ions {
        return Err(CrystalError::InvalidTrap(format!("{} starting positions for {} ions", start.len(), trap.n_ions)));
    }
    let pot = Potential { kx: trap.beta_x().powi(2) };
    let mut q: Vec<f64> = start.iter().flat_map(|p| [p[0], p[1]]).collect();
    let mut energy = pot.energy(&q);
    let mut grad = pot.gradient(&q);
    let mut shift = 0.0f64;
    let mut iterations = 0;

    while grad.norm() > GRADIENT_TOLERANCE {
        if iterations >= MAX_ITERATIONS {
            return Err(CrystalError::NonConvergence { iterations, gradient_norm: grad.norm() });
        }
        iterations += 1;
        let hess = pot.hessian(&q);
        let scale = hess.diagonal().abs().max().max(1.0);
        // smallest diagonal shift that makes the Newton system positive definite
        let mut step = None;
        let mut mu = shift;
        for _ in 0..200 {
            let shifted = &hess + DMatrix::identity(q.len(), q.len()) * mu;
            if let Some(chol) = shifted.cholesky() {
                step = Some(chol.solve(&(-&grad)));
                break;
            }
            mu = if mu == 0.0 { 1e-8 * scale } else { mu * 4.0 };
        }
        let step = step.ok_or(CrystalError::NonConvergence { iterations, gradient_norm: grad.norm() })?;
        shift = mu * 0.25;

        let slope = grad.dot(&step);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = q.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            let e = pot.energy(&trial);
            if e <= energy + 1e-4 * t * slope || (e - energy).abs() <= 1e-15 * energy.abs() {
                let g = pot.gradient(&trial);
                if e < energy || g.norm() < grad.norm() {
                    q = trial;
                    energy = e;
                    grad = g;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            // at machine precision of the energy; accept a pure Newton step on the gradient
            let trial: Vec<f64> = q.iter().zip(step.iter()).map(|(a, s)| a + s).collect();
            let g = pot.gradient(&trial);
            if g.norm() >= grad.norm() {
                return Err(CrystalError::NonConvergence { iterations, gradient_norm: grad.norm() });
            }
            energy = pot.energy(&trial);
            q = trial;
            grad = g;
        }
    }

    let hess = pot.hessian(&q);
    let min_eig = hess.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig < STABILITY_TOLERANCE {
        return Err(CrystalError::UnstableCrystal(min_eig));
    }
    Ok(CrystalSolution {
        positions: q.chunks(2).map(|c| [c[0], c[1]]).collect(),
        converged: true,
        gradient_norm: grad.norm(),
        energy,
    })
}

/// Potential energy of a configuration in scaled units.
pub fn potential_energy(trap: &TrapConfig, positions: &[[f64; 2]]) -> f64 {
    let q: Vec<f64> = positions.iter().flat_map(|p| [p[0], p[1]]).collect();
    Potential { kx: trap.beta_x().powi(2) }.energy(&q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::khz_to_angular;

    fn trap(n: usize) -> TrapConfig {
        TrapConfig {
            omega_x: khz_to_angular(620.0),
            omega_y: khz_to_angular(1920.0),
            omega_z: khz_to_angular(130.0),
            n_ions: n,
        }
    }

    #[test]
    fn single_ion_sits_at_centre() {
        let s = solve_equilibrium(&trap(1), 3).unwrap();
        assert!(s.converged);
        assert!(s.positions[0][0].abs() < 1e-10 && s.positions[0][1].abs() < 1e-10);
    }

    #[test]
    fn two_ions_match_force_balance() {
        let s = solve_equilibrium(&trap(2), 0).unwrap();
        let z0 = 0.5f64.powf(2.0 / 3.0);
        let mut z: Vec<f64> = s.positions.iter().map(|p| p[1]).collect();
        z.sort_by(f64::total_cmp);
        assert!((z[0] + z0).abs() < 1e-9 && (z[1] - z0).abs() < 1e-9, "{z:?}");
        assert!(s.positions.iter().all(|p| p[0].abs() < 1e-9));
    }

    #[test]
    fn ten_ion_crystal_is_planar_and_reflection_symmetric() {
        let t = trap(10);
        let s = solve_equilibrium(&t, 1).unwrap();
        assert!(s.converged && s.gradient_norm <= 1e-10);
        let e = potential_energy(&t, &s.positions);
        let fx: Vec<[f64; 2]> = s.positions.iter().map(|p| [-p[0], p[1]]).collect();
        let fz: Vec<[f64; 2]> = s.positions.iter().map(|p| [p[0], -p[1]]).collect();
        let mut perm = s.positions.clone();
        perm.reverse();
        for other in [fx, fz, perm] {
            assert!((potential_energy(&t, &other) - e).abs() <= 1e-9 * e.abs());
        }
    }

    #[test]
    fn length_scale_is_micrometres() {
        let l = trap(2).length_scale();
        // ~ 8 µm for Yb+ at 130 kHz axial frequency
        assert!(l > 5e-6 && l < 15e-6, "{l}");
    }

    #[test]
    fn invalid_traps_are_rejected() {
        let mut t = trap(3);
        t.omega_y = t.omega_x * 0.5;
        assert!(matches!(solve_equilibrium(&t, 0), Err(CrystalError::InvalidTrap(_))));
    }
}
