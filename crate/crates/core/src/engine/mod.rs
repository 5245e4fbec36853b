//! States and time evolution.
//!
//! [`evolve`] applies e^{−iH(t−t₀)} with an adaptive Lanczos exponential,
//! [`EchoPropagator`] runs the two-segment echo sequence, and
//! [`analytic_b0_oracle`] gives the closed-form zero-field solution used to
//! check both and to size the Fock truncation.

mod checkpoint;
mod echo;
mod krylov;
mod oracle;
mod state;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use echo::{evolve_with_echo, EchoPropagator, EchoSchedule};
pub use krylov::{evolve, evolve_grid, expm_multiply, uniform_grid, EvolutionConfig};
pub use oracle::{adapt_truncation, analytic_b0_oracle, b0_oracle_state, coherent_amplitudes, max_displacement};
pub use state::{
    apply_axis_matrix, apply_global_rotation, initial_state, initial_state_fock, initial_states, sample_thermal_fock, BosonInit, SpinDirection,
    StateVector,
};

use crate::model::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("state basis does not match the operator basis")]
    BasisMismatch,
    #[error("Krylov iteration produced a non-finite value")]
    KrylovBreakdown,
    #[error("norm drifted by {0:e}")]
    NormDrift(f64),
    #[error("thermal occupation beyond n_max has weight {tail:e}")]
    TruncationTooSmall { tail: f64 },
    #[error("the zero-field oracle needs b_field = 0")]
    NonzeroField,
    #[error("invalid evolution setting: {0}")]
    InvalidConfig(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
