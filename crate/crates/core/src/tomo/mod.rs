//! Maximum-likelihood state reconstruction and entropy analysis.
//!
//! Entropies are in nats throughout.

mod entropy;
mod mle;
mod report;

pub use entropy::{fidelity, fit_entropy_scaling, pure_state_fidelity, trace_distance, von_neumann_entropy, EntropyScalingFit};
pub use mle::{mle_dicke, mle_dicke_data, mle_full, mle_full_data, MleOptions, TomoData, TomoResult, FULL_TOMO_CAP};
pub use report::{write_tomo_report, TomoReport};

use crate::measure::dicke_isometry;
use crate::C64;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TomoError {
    #[error("no shot records")]
    NoRecords,
    #[error("direction {direction} has no shots")]
    DegenerateData { direction: usize },
    #[error("records disagree on {0}")]
    InconsistentRecords(String),
    #[error("subsystem of {k} spins exceeds the limit {max}")]
    SubsystemTooLarge { k: usize, max: usize },
    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("fit needs at least two distinct subsystem sizes k >= 1")]
    DegenerateAbscissa,
    #[error("report error: {0}")]
    Report(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Basis a [`DensityMatrix`] is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DmBasis {
    /// Symmetric subspace of k spins, index q = number of excitations.
    Dicke,
    /// 2^k site basis, first site most significant, bit 1 = |1⟩.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub basis: DmBasis,
    pub matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(basis: DmBasis, matrix: DMatrix<C64>) -> Self {
        assert_eq!(matrix.nrows(), matrix.ncols());
        Self { basis, matrix }
    }

    /// I/d.
    pub fn maximally_mixed(basis: DmBasis, dim: usize) -> Self {
        Self::new(basis, DMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0))
    }

    /// |ψ⟩⟨ψ| for a normalized ψ.
    pub fn pure(basis: DmBasis, psi: &[C64]) -> Self {
        let d = psi.len();
        Self::new(basis, DMatrix::from_fn(d, d, |r, c| psi[r] * psi[c].conj()))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of spins k the matrix describes.
    pub fn n_spins(&self) -> usize {
        match self.basis {
            DmBasis::Dicke => self.dim() - 1,
            DmBasis::Full => self.dim().trailing_zeros() as usize,
        }
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        crate::linalg::hermitian_eigenvalues(&self.matrix)
    }

    /// Largest |ρ − ρ†| entry.
    pub fn hermiticity_residual(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Symmetric-subspace state in the 2^k site basis.
    pub fn to_full(&self) -> DensityMatrix {
        match self.basis {
            DmBasis::Full => self.clone(),
            DmBasis::Dicke => crate::measure::symmetric_embedding(self),
        }
    }

    /// Projection of a site-basis state onto the symmetric subspace,
    /// renormalized to unit trace.
    pub fn project_symmetric(&self) -> DensityMatrix {
        match self.basis {
            DmBasis::Dicke => self.clone(),
            DmBasis::Full => {
                let v = dicke_isometry(&[self.n_spins()]);
                let p = v.adjoint() * &self.matrix * v;
                let tr = p.trace().re;
                DensityMatrix::new(DmBasis::Dicke, p / C64::new(tr, 0.0))
            }
        }
    }
}
