//! Model parameters and Hamiltonian construction.
//!
//! The Hamiltonian is
//!
//! ```text
//! H = η Σ_i b_i Ω_i (I + σ_z^i)(a e^{iφ_i} + a† e^{−iφ_i}) − δ a†a + B Σ_i σ_x^i
//! ```
//!
//! with σ_z|0⟩ = +|0⟩. It can be built exactly on the site-resolved basis
//! ([`build_full_hamiltonian`]) or on the subensemble basis, where spins with
//! near-equal complex coupling share one Dicke ladder
//! ([`build_subensemble_hamiltonian`]).

mod config;
mod full;
mod grouping;
mod sign;
mod subensemble;

pub use config::{CrystalSource, LaserProfile, ModeRef, ModeSource, ModelConfig, ResolvedModel, SiteEntry};
pub use full::build_full_hamiltonian;
pub use grouping::{group_into_subensembles, within_cluster_ssd};
pub use sign::{conjugate_negate, normalize_sign, BasisRelabel};
pub use subensemble::build_subensemble_hamiltonian;

use crate::{Basis, SparseOperator, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("basis dimension {dim} exceeds the configured cap {cap}")]
    DimensionCapExceeded { dim: usize, cap: usize },
    #[error("invalid Fock truncation {0}")]
    InvalidTruncation(i64),
    #[error("no sites given")]
    EmptyInput,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid subensemble spec: {0}")]
    InvalidSpec(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Crystal(#[from] crate::crystal::CrystalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Upper bound on the Hilbert-space dimension an operator may have.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionCap(pub usize);

impl Default for DimensionCap {
    fn default() -> Self {
        DimensionCap(1 << 22)
    }
}

impl DimensionCap {
    pub fn check(&self, basis: &Basis) -> Result<usize, ModelError> {
        match basis.checked_dim() {
            Some(dim) if dim <= self.0 => Ok(dim),
            Some(dim) => Err(ModelError::DimensionCapExceeded { dim, cap: self.0 }),
            None => Err(ModelError::DimensionCapExceeded { dim: usize::MAX, cap: self.0 }),
        }
    }
}

/// Per-site light shift, mode amplitude and motional phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteCoupling {
    /// Light-shift Rabi rate Ω_i (rad/s).
    pub omega: f64,
    /// Mode amplitude b_i at this site.
    pub b: f64,
    /// Motional phase φ_i (rad).
    pub phi: f64,
}

impl SiteCoupling {
    /// Complex coupling η b_i Ω_i e^{iφ_i}: the coefficient of `a` per unit (1+σ_z)/1.
    pub fn complex_coupling(&self, eta: f64) -> C64 {
        C64::from_polar(eta * self.b * self.omega, self.phi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Lamb–Dicke parameter η.
    pub eta: f64,
    /// Detuning δ = μ − ω_k (rad/s).
    pub delta: f64,
    /// Transverse field B (rad/s).
    pub b_field: f64,
    pub sites: Vec<SiteCoupling>,
    /// Largest retained Fock number.
    pub n_max: usize,
}

impl ModelParams {
    pub fn n_spins(&self) -> usize {
        self.sites.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.sites.is_empty() {
            return Err(ModelError::EmptyInput);
        }
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return Err(ModelError::InvalidParams(format!("eta must be finite and >= 0, got {}", self.eta)));
        }
        if !self.delta.is_finite() || !self.b_field.is_finite() {
            return Err(ModelError::InvalidParams("delta and b_field must be finite".into()));
        }
        for (i, s) in self.sites.iter().enumerate() {
            if !(s.omega.is_finite() && s.b.is_finite() && s.phi.is_finite()) {
                return Err(ModelError::InvalidParams(format!("site {i} has a non-finite entry")));
            }
        }
        Ok(())
    }

    pub fn basis(&self) -> Basis {
        Basis::full(self.n_spins(), self.n_max)
    }

    /// Per-site complex couplings η b_i Ω_i e^{iφ_i}.
    pub fn couplings(&self) -> Vec<C64> {
        self.sites.iter().map(|s| s.complex_coupling(self.eta)).collect()
    }

    /// Laser phase shifted by `dphi` on every site.
    pub fn phase_shifted(&self, dphi: f64) -> Self {
        let mut out = self.clone();
        for s in &mut out.sites {
            s.phi += dphi;
        }
        out
    }

    /// Uniform-coupling model: every site has the same Ω, b = 1/√N and φ = 0.
    pub fn uniform(n: usize, eta: f64, omega: f64, delta: f64, b_field: f64, n_max: usize) -> Self {
        let b = 1.0 / (n as f64).sqrt();
        Self {
            eta,
            delta,
            b_field,
            sites: vec![SiteCoupling { omega, b, phi: 0.0 }; n],
            n_max,
        }
    }
}

/// One Dicke ladder of the subensemble model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubensembleGroup {
    /// Site indices of the spins in this group.
    pub sites: Vec<usize>,
    /// Effective per-spin coupling g_j (rad/s), the magnitude of η b Ω e^{iφ}.
    pub coupling: f64,
    /// Group phase φ_j (rad).
    pub phase: f64,
}

impl SubensembleGroup {
    pub fn n_spins(&self) -> usize {
        self.sites.len()
    }

    pub fn complex_coupling(&self) -> C64 {
        C64::from_polar(self.coupling, self.phase)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubensembleSpec {
    pub groups: Vec<SubensembleGroup>,
}

impl SubensembleSpec {
    /// Groups of the given (size, coupling, phase) with consecutive site labels.
    pub fn from_counts(groups: &[(usize, f64, f64)]) -> Self {
        let mut next = 0;
        let groups = groups
            .iter()
            .map(|&(n, coupling, phase)| {
                let sites = (next..next + n).collect();
                next += n;
                SubensembleGroup { sites, coupling, phase }
            })
            .collect();
        Self { groups }
    }

    /// Groups a full model's sites by an explicit partition; each group's
    /// coupling is the mean complex coupling of its members.
    pub fn from_partition(params: &ModelParams, partition: Vec<Vec<usize>>) -> Self {
        let z = params.couplings();
        let groups = partition
            .into_iter()
            .map(|sites| {
                let mean = sites.iter().map(|&i| z[i]).sum::<C64>() / sites.len() as f64;
                SubensembleGroup { sites, coupling: mean.norm(), phase: wrap_phase(mean.arg()) }
            })
            .collect();
        Self { groups }
    }

    pub fn n_spins(&self) -> usize {
        self.groups.iter().map(SubensembleGroup::n_spins).sum()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.groups.is_empty() {
            return Err(ModelError::InvalidSpec("at least one group is required".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (j, g) in self.groups.iter().enumerate() {
            if g.sites.is_empty() {
                return Err(ModelError::InvalidSpec(format!("group {j} is empty")));
            }
            if !g.coupling.is_finite() || !g.phase.is_finite() {
                return Err(ModelError::InvalidSpec(format!("group {j} has a non-finite coupling")));
            }
            for &s in &g.sites {
                if !seen.insert(s) {
                    return Err(ModelError::InvalidSpec(format!("site {s} appears in two groups")));
                }
            }
        }
        Ok(())
    }

    pub fn basis(&self, n_max: usize) -> Basis {
        Basis::subensemble(self.groups.iter().map(|g| g.sites.clone()).collect(), n_max)
    }
}

/// Subensemble spec together with the remaining Hamiltonian symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubensembleModel {
    pub spec: SubensembleSpec,
    pub delta: f64,
    pub b_field: f64,
    pub n_max: usize,
}

/// Either representation of the spin-boson model.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Full(ModelParams),
    Subensemble(SubensembleModel),
}

impl Model {
    pub fn basis(&self) -> Basis {
        match self {
            Model::Full(p) => p.basis(),
            Model::Subensemble(s) => s.spec.basis(s.n_max),
        }
    }

    pub fn n_spins(&self) -> usize {
        match self {
            Model::Full(p) => p.n_spins(),
            Model::Subensemble(s) => s.spec.n_spins(),
        }
    }

    pub fn n_max(&self) -> usize {
        match self {
            Model::Full(p) => p.n_max,
            Model::Subensemble(s) => s.n_max,
        }
    }

    pub fn delta(&self) -> f64 {
        match self {
            Model::Full(p) => p.delta,
            Model::Subensemble(s) => s.delta,
        }
    }

    pub fn b_field(&self) -> f64 {
        match self {
            Model::Full(p) => p.b_field,
            Model::Subensemble(s) => s.b_field,
        }
    }

    pub fn with_n_max(&self, n_max: usize) -> Self {
        match self {
            Model::Full(p) => Model::Full(ModelParams { n_max, ..p.clone() }),
            Model::Subensemble(s) => Model::Subensemble(SubensembleModel { n_max, ..s.clone() }),
        }
    }

    pub fn phase_shifted(&self, dphi: f64) -> Self {
        match self {
            Model::Full(p) => Model::Full(p.phase_shifted(dphi)),
            Model::Subensemble(s) => {
                let mut s = s.clone();
                for g in &mut s.spec.groups {
                    g.phase += dphi;
                }
                Model::Subensemble(s)
            }
        }
    }

    /// Complex coupling of every ladder with its spin count.
    pub fn ladder_couplings(&self) -> Vec<(usize, C64)> {
        match self {
            Model::Full(p) => p.couplings().into_iter().map(|z| (1, z)).collect(),
            Model::Subensemble(s) => s.spec.groups.iter().map(|g| (g.n_spins(), g.complex_coupling())).collect(),
        }
    }

    pub fn hamiltonian(&self, cap: DimensionCap) -> Result<HamiltonianOperator, ModelError> {
        match self {
            Model::Full(p) => build_full_hamiltonian(p, cap),
            Model::Subensemble(s) => {
                build_subensemble_hamiltonian(&s.spec, s.delta, s.b_field, s.spec.n_spins(), s.n_max, cap)
            }
        }
    }
}

/// A constructed Hamiltonian together with the basis it acts on.
#[derive(Debug, Clone)]
pub struct HamiltonianOperator {
    pub basis: Basis,
    pub matrix: SparseOperator,
}

impl HamiltonianOperator {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Largest |H_rc − conj(H_cr)| relative to the largest entry.
    pub fn relative_hermiticity_residual(&self) -> f64 {
        let scale = self.matrix.max_abs_entry();
        if scale == 0.0 {
            0.0
        } else {
            self.matrix.hermiticity_residual() / scale
        }
    }
}

/// Wraps a phase into [0, 2π).
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}
