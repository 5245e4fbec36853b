//! Observables, distributions, reduced states and simulated shots.
//!
//! Outcome encoding: bit 0 is σ_z = +1 (|0⟩) along the measurement
//! direction, bit 1 is σ_z = −1.

mod distributions;
mod io;
mod observables;
mod reduced;
mod sampling;

pub use distributions::{sample_total_spin, time_averaged_distribution, total_spin_distribution, SpinHistogram};
pub use io::{read_shot_records, write_histograms, write_series, write_shot_records, ShotFileHeader};
pub use observables::{
    cumulative_time_average, expect_pauli, ladder_spin_expectations, pauli_series, ObservableSeries, Scope,
};
pub use reduced::{
    dicke_isometry, reduced_dm_boson, reduced_dm_full, reduced_dm_full_capped, reduced_dm_sites, reduced_dm_symmetric,
    symmetric_embedding, symmetric_leakage, DEFAULT_FULL_CAP,
};
pub use sampling::{direction_rng, random_directions, rotate_to_direction, sample_shots, Direction, ShotRecord};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("site {site} out of range for {n_spins} spins")]
    SiteOutOfRange { site: usize, n_spins: usize },
    #[error("series is empty")]
    EmptySeries,
    #[error("times must start at 0 and increase strictly")]
    BadTimes,
    #[error("histograms mix axes or spin counts")]
    MixedAxes,
    #[error("no sites selected")]
    EmptySelection,
    #[error("subsystem of {k} spins exceeds the limit {max}")]
    SubsystemTooLarge { k: usize, max: usize },
    #[error("operation needs the full site-resolved basis")]
    BasisMismatch,
    #[error("duplicate site {0} in selection")]
    DuplicateSite(usize),
    #[error("malformed record file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
