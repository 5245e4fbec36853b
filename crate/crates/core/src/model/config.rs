//! Model definitions read from TOML.
//!
//! ```toml
//! eta = 0.05
//! delta_khz = 0.5          # signed, kHz/2π
//! b_khz = 0.09
//! n_max = 40               # optional; omitted means "choose automatically"
//!
//! [[sites]]                # explicit site table ...
//! omega_khz = 4.0
//! b = 0.5
//! phi_rad = 0.0
//!
//! [modes]                  # ... or a mode-table file from the crystal tools
//! file = "modes.toml"
//! positions = "positions.csv"
//! mode = "com"             # or a zero-based index
//!
//! [crystal]                # ... or a crystal solved on the fly
//! trap_khz = [620.0, 1920.0, 130.0]
//! n_ions = 10
//! mode = 2
//!
//! [laser]                  # Gaussian light-shift profile for mode-based sites
//! peak_omega_khz = 4.0
//! center_um = [0.0, 0.0]
//! waist_um = [40.0, 60.0]  # (x, z); omit for a uniform beam
//! phase_curvature_rad_per_um2 = 0.0
//! ```

use super::{wrap_phase, ModelError, ModelParams, SiteCoupling};
use crate::crystal::{
    read_mode_table, read_positions_csv, select_mode, solve_equilibrium, transverse_modes, ModeSelector, TrapConfig,
};
use crate::khz_to_angular;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteEntry {
    pub omega_khz: f64,
    pub b: f64,
    #[serde(default)]
    pub phi_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModeRef {
    Index(usize),
    Name(String),
}

impl ModeRef {
    fn selector(&self) -> Result<ModeSelector, ModelError> {
        match self {
            ModeRef::Index(k) => Ok(ModeSelector::Index(*k)),
            ModeRef::Name(s) if s.eq_ignore_ascii_case("com") => Ok(ModeSelector::Com),
            ModeRef::Name(s) => Err(ModelError::Config(format!("unknown mode '{s}', expected \"com\" or an index"))),
        }
    }
}

impl Default for ModeRef {
    fn default() -> Self {
        ModeRef::Name("com".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSource {
    pub file: PathBuf,
    #[serde(default)]
    pub positions: Option<PathBuf>,
    #[serde(default)]
    pub mode: ModeRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalSource {
    /// (ω_x, ω_y, ω_z) in kHz/2π.
    pub trap_khz: [f64; 3],
    pub n_ions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: ModeRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserProfile {
    pub peak_omega_khz: f64,
    #[serde(default)]
    pub center_um: [f64; 2],
    #[serde(default)]
    pub waist_um: Option<[f64; 2]>,
    #[serde(default)]
    pub phase_curvature_rad_per_um2: f64,
}

impl LaserProfile {
    /// Light shift (rad/s) and motional phase at a position in µm.
    pub fn evaluate(&self, p: [f64; 2]) -> (f64, f64) {
        let dx = p[0] - self.center_um[0];
        let dz = p[1] - self.center_um[1];
        let envelope = match self.waist_um {
            Some([wx, wz]) => (-2.0 * (dx * dx / (wx * wx) + dz * dz / (wz * wz))).exp(),
            None => 1.0,
        };
        let phase = wrap_phase(self.phase_curvature_rad_per_um2 * (dx * dx + dz * dz));
        (khz_to_angular(self.peak_omega_khz) * envelope, phase)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub eta: f64,
    pub delta_khz: f64,
    pub b_khz: f64,
    #[serde(default)]
    pub n_max: Option<i64>,
    #[serde(default)]
    pub sites: Vec<SiteEntry>,
    #[serde(default)]
    pub modes: Option<ModeSource>,
    #[serde(default)]
    pub crystal: Option<CrystalSource>,
    #[serde(default)]
    pub laser: Option<LaserProfile>,
}

/// A model definition with every reference resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedModel {
    /// `n_max` is 0 when [`ResolvedModel::auto_truncation`] is set.
    pub params: ModelParams,
    pub auto_truncation: bool,
    /// Ion positions (µm), when the sites came from a crystal.
    pub positions_um: Option<Vec<[f64; 2]>>,
    /// Frequency of the selected mode (rad/s), when known.
    pub mode_frequency: Option<f64>,
}

impl ModelConfig {
    pub fn from_toml(text: &str) -> Result<Self, ModelError> {
        toml::from_str(text).map_err(|e| ModelError::Config(e.to_string()))
    }

    /// Builds the parameters; relative paths are taken from `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> Result<ResolvedModel, ModelError> {
        let n_max = match self.n_max {
            Some(n) if n < 0 => return Err(ModelError::InvalidTruncation(n)),
            Some(n) => Some(n as usize),
            None => None,
        };
        let sources = [!self.sites.is_empty(), self.modes.is_some(), self.crystal.is_some()];
        if sources.iter().filter(|&&s| s).count() != 1 {
            return Err(ModelError::Config("give exactly one of [[sites]], [modes] or [crystal]".into()));
        }

        let (sites, positions_um, mode_frequency) = if !self.sites.is_empty() {
            if self.laser.is_some() {
                return Err(ModelError::Config("[laser] applies only to mode-based sites".into()));
            }
            let sites = self
                .sites
                .iter()
                .map(|s| SiteCoupling { omega: khz_to_angular(s.omega_khz), b: s.b, phi: wrap_phase(s.phi_rad) })
                .collect();
            (sites, None, None)
        } else {
            let (freq, vector, positions) = if let Some(src) = &self.modes {
                let table = read_mode_table(&base_dir.join(&src.file))?;
                let (w, v) = select_mode(&table, src.mode.selector()?)?;
                let positions = match &src.positions {
                    Some(p) => Some(read_positions_csv(&base_dir.join(p))?),
                    None => None,
                };
                (w, v, positions)
            } else {
                let src = self.crystal.as_ref().expect("one source is present");
                let trap = TrapConfig {
                    omega_x: khz_to_angular(src.trap_khz[0]),
                    omega_y: khz_to_angular(src.trap_khz[1]),
                    omega_z: khz_to_angular(src.trap_khz[2]),
                    n_ions: src.n_ions,
                };
                let solution = solve_equilibrium(&trap, src.seed)?;
                let table = transverse_modes(&trap, &solution)?;
                let (w, v) = select_mode(&table, src.mode.selector()?)?;
                (w, v, Some(solution.positions_um(&trap)))
            };
            let laser = self
                .laser
                .as_ref()
                .ok_or_else(|| ModelError::Config("mode-based sites need a [laser] section".into()))?;
            if laser.waist_um.is_some() || laser.phase_curvature_rad_per_um2 != 0.0 {
                match &positions {
                    Some(p) if p.len() == vector.len() => {}
                    _ => return Err(ModelError::Config("a shaped laser profile needs ion positions".into())),
                }
            }
            let sites = vector
                .iter()
                .enumerate()
                .map(|(i, &b)| {
                    let (omega, phi) = match &positions {
                        Some(p) => laser.evaluate(p[i]),
                        None => (khz_to_angular(laser.peak_omega_khz), 0.0),
                    };
                    SiteCoupling { omega, b, phi }
                })
                .collect();
            (sites, positions, Some(freq))
        };

        let params = ModelParams {
            eta: self.eta,
            delta: khz_to_angular(self.delta_khz),
            b_field: khz_to_angular(self.b_khz),
            sites,
            n_max: n_max.unwrap_or(0),
        };
        params.validate()?;
        Ok(ResolvedModel { params, auto_truncation: n_max.is_none(), positions_um, mode_frequency })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_site_table() {
        let cfg = ModelConfig::from_toml(
            r#"
            eta = 0.05
            delta_khz = -0.75
            b_khz = 0.09
            n_max = 12
            [[sites]]
            omega_khz = 4.0
            b = 0.5
            phi_rad = 0.25
            [[sites]]
            omega_khz = 3.0
            b = -0.5
            "#,
        )
        .unwrap();
        let r = cfg.resolve(Path::new(".")).unwrap();
        assert_eq!(r.params.n_spins(), 2);
        assert_eq!(r.params.n_max, 12);
        assert!(!r.auto_truncation);
        assert!((r.params.delta + khz_to_angular(0.75)).abs() < 1e-9);
        assert_eq!(r.params.sites[1].phi, 0.0);
    }

    #[test]
    fn negative_truncation_is_rejected() {
        let cfg = ModelConfig::from_toml("eta = 0.1\ndelta_khz = 0.5\nb_khz = 0.0\nn_max = -1\n[[sites]]\nomega_khz = 1.0\nb = 1.0\n").unwrap();
        assert!(matches!(cfg.resolve(Path::new(".")), Err(ModelError::InvalidTruncation(-1))));
    }

    #[test]
    fn crystal_source_with_uniform_laser() {
        let cfg = ModelConfig::from_toml(
            r#"
            eta = 0.05
            delta_khz = 0.5
            b_khz = 0.0
            [crystal]
            trap_khz = [620.0, 1920.0, 130.0]
            n_ions = 4
            [laser]
            peak_omega_khz = 4.0
            "#,
        )
        .unwrap();
        let r = cfg.resolve(Path::new(".")).unwrap();
        assert!(r.auto_truncation);
        assert_eq!(r.params.n_spins(), 4);
        for s in &r.params.sites {
            assert!((s.b - 0.5).abs() < 1e-10);
        }
        assert!((r.mode_frequency.unwrap() - khz_to_angular(1920.0)).abs() < 1e-6);
        assert_eq!(r.positions_um.unwrap().len(), 4);
    }

    #[test]
    fn ambiguous_sources_are_rejected() {
        let cfg = ModelConfig::from_toml("eta = 0.1\ndelta_khz = 0.5\nb_khz = 0.0\n").unwrap();
        assert!(matches!(cfg.resolve(Path::new(".")), Err(ModelError::Config(_))));
    }

    #[test]
    fn gaussian_profile_peaks_at_centre() {
        let laser = LaserProfile { peak_omega_khz: 2.0, center_um: [1.0, 0.0], waist_um: Some([10.0, 20.0]), phase_curvature_rad_per_um2: 0.0 };
        let (w0, _) = laser.evaluate([1.0, 0.0]);
        let (w1, _) = laser.evaluate([11.0, 0.0]);
        assert!((w0 - khz_to_angular(2.0)).abs() < 1e-9);
        assert!((w1 / w0 - (-2.0f64).exp()).abs() < 1e-12);
    }
}
