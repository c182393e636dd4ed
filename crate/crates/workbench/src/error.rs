use morphsim::accuracy::AccuracyError;
use morphsim::dma::DmaError;
use morphsim::doc::DocError;
use morphsim::grid::GridError;
use morphsim::material::MaterialError;
use morphsim::shooter::ShooterError;
use morphsim::sim::SimError;
use thiserror::Error;

/// Workbench failures, split by who has to act: the user (bad input) or the
/// numerics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorkbenchError {
    #[error("{0}")]
    Input(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("{name} changed: expected hash {expected}, current {current}")]
    Conflict { name: String, expected: String, current: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = WorkbenchError> = std::result::Result<T, E>;

impl WorkbenchError {
    pub fn input(e: impl std::fmt::Display) -> Self {
        WorkbenchError::Input(e.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            WorkbenchError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl From<DocError> for WorkbenchError {
    fn from(e: DocError) -> Self {
        match e {
            DocError::Io { .. } => WorkbenchError::NotFound(e.to_string()),
            _ => WorkbenchError::input(e),
        }
    }
}

impl From<DmaError> for WorkbenchError {
    fn from(e: DmaError) -> Self {
        match e {
            DmaError::SingularSystem(_) => WorkbenchError::Numerical(e.to_string()),
            DmaError::Io { .. } => WorkbenchError::NotFound(e.to_string()),
            _ => WorkbenchError::input(e),
        }
    }
}

impl From<MaterialError> for WorkbenchError {
    fn from(e: MaterialError) -> Self {
        match e {
            MaterialError::FitDivergence { .. } | MaterialError::NonConvergence(_) => {
                WorkbenchError::Numerical(e.to_string())
            }
            MaterialError::Dma(d) => d.into(),
            MaterialError::Document(d) => d.into(),
            _ => WorkbenchError::input(e),
        }
    }
}

impl From<GridError> for WorkbenchError {
    fn from(e: GridError) -> Self {
        match e {
            GridError::Material(m) => m.into(),
            GridError::Document(d) => d.into(),
            _ => WorkbenchError::input(e),
        }
    }
}

impl From<SimError> for WorkbenchError {
    fn from(e: SimError) -> Self {
        if e.is_convergence_failure() {
            return WorkbenchError::Numerical(e.to_string());
        }
        match e {
            SimError::Grid(g) => g.into(),
            SimError::Document(d) => d.into(),
            _ => WorkbenchError::input(e),
        }
    }
}

impl From<ShooterError> for WorkbenchError {
    fn from(e: ShooterError) -> Self {
        match e {
            ShooterError::NoBracket { .. } | ShooterError::MaxIterations { .. } | ShooterError::ToleranceNotMet { .. } => {
                WorkbenchError::Numerical(e.to_string())
            }
            ShooterError::Material(m) => m.into(),
            ShooterError::Grid(g) => g.into(),
            ShooterError::Sim(s) => s.into(),
            _ => WorkbenchError::input(e),
        }
    }
}

impl From<AccuracyError> for WorkbenchError {
    fn from(e: AccuracyError) -> Self {
        match e {
            AccuracyError::Document(d) => d.into(),
            _ => WorkbenchError::input(e),
        }
    }
}
