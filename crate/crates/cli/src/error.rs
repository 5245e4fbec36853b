use dicke_core::crystal::CrystalError;
use dicke_core::engine::EngineError;
use dicke_core::measure::MeasureError;
use dicke_core::model::ModelError;
use dicke_core::tomo::TomoError;
use thiserror::Error;

/// Exit status of the command-line tool.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// I/O failures that are not configuration problems.
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERIC: i32 = 3;
    pub const RESOURCE: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Crystal(#[from] CrystalError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Tomo(#[from] TomoError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn crystal_code(e: &CrystalError) -> i32 {
    match e {
        CrystalError::InvalidTrap(_) | CrystalError::IndexOutOfRange { .. } | CrystalError::Format(_) => exit::CONFIG,
        CrystalError::Io(_) => exit::CONFIG,
        _ => exit::NUMERIC,
    }
}

fn model_code(e: &ModelError) -> i32 {
    match e {
        ModelError::DimensionCapExceeded { .. } => exit::RESOURCE,
        ModelError::Crystal(c) => crystal_code(c),
        // a missing mode or positions file named in the config
        ModelError::Io(_) => exit::CONFIG,
        _ => exit::CONFIG,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Resource(_) => exit::RESOURCE,
            CliError::Model(e) => model_code(e),
            CliError::Crystal(e) => crystal_code(e),
            CliError::Engine(e) => match e {
                EngineError::Model(m) => model_code(m),
                EngineError::TruncationTooSmall { .. } => exit::RESOURCE,
                EngineError::InvalidConfig(_) | EngineError::NonzeroField => exit::CONFIG,
                EngineError::Io(_) | EngineError::Checkpoint(_) => exit::IO,
                _ => exit::NUMERIC,
            },
            CliError::Measure(e) => match e {
                MeasureError::SiteOutOfRange { .. }
                | MeasureError::EmptySelection
                | MeasureError::DuplicateSite(_)
                | MeasureError::SubsystemTooLarge { .. } => exit::CONFIG,
                MeasureError::Io(_) => exit::IO,
                _ => exit::NUMERIC,
            },
            CliError::Tomo(e) => match e {
                TomoError::SubsystemTooLarge { .. } => exit::CONFIG,
                TomoError::Io(_) | TomoError::Report(_) => exit::IO,
                _ => exit::NUMERIC,
            },
            CliError::Io(_) => exit::IO,
        }
    }
}
