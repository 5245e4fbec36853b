//! Planar ion-crystal equilibria and transverse normal modes.
//!
//! Internally everything is in scaled units: lengths in
//! ℓ = (e²/(4πε₀ m ω_z²))^{1/3}, frequencies in ω_z. The crystal lies in the
//! xz plane (ω_y is the stiffest direction) and the modes are the y
//! (transverse) displacement modes.

mod equilibrium;
mod io;
mod modes;

pub use equilibrium::{potential_energy, solve_equilibrium, solve_equilibrium_from, CrystalSolution};
pub use io::{read_mode_table, read_positions_csv, write_mode_table, write_positions_csv};
pub use modes::{select_mode, transverse_modes, ModeSelector, ModeTable};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permittivity (F/m).
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Mass of a ¹⁷¹Yb⁺ ion (kg): atomic mass 170.936 3258 u minus one electron.
pub const YB171_ION_MASS: f64 = (170.936_325_8 - 5.485_799e-4) * 1.660_539_066_60e-27;

#[derive(Debug, Error)]
pub enum CrystalError {
    #[error("invalid trap: {0}")]
    InvalidTrap(String),
    #[error("equilibrium search did not converge after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NonConvergence { iterations: usize, gradient_norm: f64 },
    #[error("in-plane Hessian has eigenvalue {0:e}; the planar crystal is unstable")]
    UnstableCrystal(f64),
    #[error("transverse Hessian has negative eigenvalue {0:e}")]
    ImaginaryFrequency(f64),
    #[error("mode index {index} out of range for {len} modes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("solution has not converged")]
    NotConverged,
    #[error("malformed mode data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Secular trap frequencies (rad/s) and ion number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    pub omega_x: f64,
    pub omega_y: f64,
    pub omega_z: f64,
    pub n_ions: usize,
}

impl TrapConfig {
    pub fn validate(&self) -> Result<(), CrystalError> {
        let all_positive = [self.omega_x, self.omega_y, self.omega_z].iter().all(|w| w.is_finite() && *w > 0.0);
        if !all_positive {
            return Err(CrystalError::InvalidTrap("trap frequencies must be positive".into()));
        }
        if !(self.omega_y > self.omega_x && self.omega_y > self.omega_z) {
            return Err(CrystalError::InvalidTrap("omega_y must be the largest trap frequency".into()));
        }
        if self.n_ions == 0 {
            return Err(CrystalError::InvalidTrap("need at least one ion".into()));
        }
        Ok(())
    }

    /// Characteristic length ℓ in metres for a ¹⁷¹Yb⁺ crystal.
    pub fn length_scale(&self) -> f64 {
        let k = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY);
        (k / (YB171_ION_MASS * self.omega_z * self.omega_z)).cbrt()
    }

    pub(crate) fn beta_x(&self) -> f64 {
        self.omega_x / self.omega_z
    }

    pub(crate) fn beta_y(&self) -> f64 {
        self.omega_y / self.omega_z
    }
}

/// Nearest neighbour of each ion by Euclidean distance (lowest index on ties).
pub fn nearest_neighbours(positions: &[[f64; 2]]) -> Vec<Option<usize>> {
    (0..positions.len())
        .map(|i| {
            (0..positions.len())
                .filter(|&j| j != i)
                .min_by(|&a, &b| dist(positions[i], positions[a]).total_cmp(&dist(positions[i], positions[b])))
        })
        .collect()
}

/// The `k` ions closest to ion `seed` (including it), ordered by distance.
pub fn neighbourhood(positions: &[[f64; 2]], seed: usize, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..positions.len()).collect();
    idx.sort_by(|&a, &b| {
        dist(positions[seed], positions[a]).total_cmp(&dist(positions[seed], positions[b])).then(a.cmp(&b))
    });
    idx.truncate(k);
    idx
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}
