//! Run configuration.
//!
//! Only `[model]` is required; every other field has a default, and
//! [`RunConfig::load`] returns the fully explicit configuration that is echoed
//! into the run manifest.
//!
//! ```toml
//! seed = 7
//! output_dir = "out"
//!
//! [model]                      # see dicke_core::model::ModelConfig
//! eta = 0.05
//! delta_khz = 0.5
//! b_khz = 0.09
//! [[model.sites]]
//! omega_khz = 4.0
//! b = 0.5
//!
//! [representation]
//! kind = "subensemble"         # or "full"
//! groups = 2
//!
//! [evolution]
//! t_max_ms = 4.0
//! dt_ms = 0.25
//! echo = true
//! initial = "+x"
//!
//! [measurement]
//! directions = 25
//! shots = 50
//! site_groups = [[0, 1, 2, 3]]
//!
//! [tomography]
//! method = "both"
//! k_values = [1, 2, 3, 4]
//! ```

use crate::CliError;
use dicke_core::engine::{BosonInit, SpinDirection};
use dicke_core::model::ModelConfig;
use dicke_core::Axis;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Largest Hilbert-space dimension any operator may have.
    #[serde(default = "default_dimension_cap")]
    pub dimension_cap: usize,
    pub model: ModelConfig,
    #[serde(default)]
    pub representation: RepresentationConfig,
    #[serde(default)]
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub measurement: MeasurementConfig,
    #[serde(default)]
    pub tomography: TomographyConfig,
    #[serde(default)]
    pub engineered: EngineeredConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_dimension_cap() -> usize {
    1 << 22
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepresentationKind {
    Full,
    Subensemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RepresentationConfig {
    pub kind: RepresentationKind,
    /// Number of subensembles M.
    pub groups: usize,
    /// Also run the full model and report the largest single-site deviation.
    pub compare_full: bool,
    /// Tolerance passed to the automatic Fock truncation.
    pub truncation_tolerance: f64,
}

impl Default for RepresentationConfig {
    fn default() -> Self {
        Self { kind: RepresentationKind::Subensemble, groups: 2, compare_full: false, truncation_tolerance: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionSection {
    pub t_max_ms: f64,
    pub dt_ms: f64,
    pub echo: bool,
    pub pivot_axis: Axis,
    pub initial: SpinDirection,
    pub boson: BosonInit,
    /// Sampled Fock trajectories for a thermal boson.
    pub trajectories: usize,
    pub krylov_dim: usize,
    pub step_tolerance: f64,
    /// Write the final state of every trajectory as a binary checkpoint.
    pub checkpoint: bool,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        Self {
            t_max_ms: 4.0,
            dt_ms: 0.25,
            echo: true,
            pivot_axis: Axis::X,
            initial: SpinDirection::PlusX,
            boson: BosonInit::Vacuum,
            trajectories: 32,
            krylov_dim: 30,
            step_tolerance: 1e-10,
            checkpoint: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasurementConfig {
    pub axes: Vec<Axis>,
    /// Random measurement directions K.
    pub directions: usize,
    /// Shots per direction.
    pub shots: usize,
    /// Sampled total-spin shots per output time; 0 writes exact histograms only.
    pub samples_per_time: usize,
    /// Site groups for entropy analysis; subsystems are their leading k sites.
    pub site_groups: Vec<Vec<usize>>,
    /// Sites that also get their own Pauli series.
    pub series_sites: Vec<usize>,
    pub write_shots: bool,
}

impl Default for MeasurementConfig {
    fn default() -> Self {
        Self {
            axes: Axis::ALL.to_vec(),
            directions: 25,
            shots: 50,
            samples_per_time: 200,
            site_groups: vec![vec![0, 1, 2, 3]],
            series_sites: Vec::new(),
            write_shots: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TomoMethod {
    Dicke,
    Full,
    Both,
}

impl TomoMethod {
    pub fn dicke(self) -> bool {
        matches!(self, TomoMethod::Dicke | TomoMethod::Both)
    }

    pub fn full(self) -> bool {
        matches!(self, TomoMethod::Full | TomoMethod::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TomographyConfig {
    pub method: TomoMethod,
    pub k_values: Vec<usize>,
    /// Largest k reconstructed site-resolved.
    pub full_cap: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Time of the entropy-scaling fit.
    pub fit_time_ms: f64,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self {
            method: TomoMethod::Both,
            k_values: vec![1, 2, 3, 4],
            full_cap: 4,
            max_iterations: 10_000,
            tolerance: 1e-10,
            fit_time_ms: 4.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineeredConfig {
    /// Zero-based mode rank in descending frequency.
    pub mode: usize,
    /// Pairs of each kind (strongly coupled, near a node).
    pub pairs_per_kind: usize,
}

impl Default for EngineeredConfig {
    fn default() -> Self {
        Self { mode: 2, pairs_per_kind: 1 }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a configuration file; relative paths in it are later resolved
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        let e = &self.evolution;
        if !(e.t_max_ms >= 0.0) || !(e.dt_ms > 0.0) {
            return bad("evolution needs t_max_ms >= 0 and dt_ms > 0");
        }
        if e.t_max_ms / e.dt_ms > 1e6 {
            return bad("evolution grid has more than 10^6 points");
        }
        if e.trajectories == 0 {
            return bad("trajectories must be at least 1");
        }
        if self.representation.groups == 0 {
            return bad("representation.groups must be at least 1");
        }
        if !(self.representation.truncation_tolerance > 0.0) {
            return bad("truncation_tolerance must be positive");
        }
        let m = &self.measurement;
        if m.directions == 0 || m.shots == 0 {
            return bad("measurement needs at least one direction and one shot");
        }
        if m.axes.is_empty() {
            return bad("measurement.axes is empty");
        }
        let t = &self.tomography;
        if t.k_values.contains(&0) {
            return bad("tomography.k_values must be positive");
        }
        if !(t.tolerance > 0.0) || t.max_iterations == 0 {
            return bad("tomography needs a positive tolerance and iteration limit");
        }
        Ok(())
    }

    /// Fully explicit TOML rendering.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn output_grid(&self) -> Vec<f64> {
        dicke_core::engine::uniform_grid(self.evolution.dt_ms * 1e-3, self.evolution.t_max_ms * 1e-3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [model]
        eta = 0.05
        delta_khz = 0.5
        b_khz = 0.09
        [[model.sites]]
        omega_khz = 4.0
        b = 0.5
    "#;

    #[test]
    fn defaults_fill_everything_but_the_model() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.evolution.dt_ms, 0.25);
        assert_eq!(cfg.evolution.trajectories, 32);
        assert_eq!(cfg.measurement.directions, 25);
        assert_eq!(cfg.tomography.fit_time_ms, 4.5);
        assert_eq!(cfg.engineered.mode, 2);
        // the explicit rendering round-trips
        let again = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(cfg.output_grid().len(), 17);
    }

    #[test]
    fn missing_model_is_a_config_error() {
        assert!(matches!(RunConfig::from_toml("seed = 1"), Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\n[evolution]\ntmax = 3.0\n");
        assert!(RunConfig::from_toml(&text).is_err());
    }
}
