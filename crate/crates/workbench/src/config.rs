//! Solver and smoother defaults read from the `--config` JSON file.

use std::path::Path;

use morphsim::accuracy::ReportOptions;
use morphsim::dma::SmootherConfig;
use morphsim::grid::MeshConfig;
use morphsim::shooter::ShooterConfig;
use morphsim::sim::SolverConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WorkbenchError};

pub const DEFAULT_WORKERS: usize = 2;

/// Every section is optional; missing keys keep their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkbenchConfig {
    pub smoother: SmootherConfig,
    pub solver: SolverConfig,
    pub mesh: MeshConfig,
    pub shooter: ShooterConfig,
    pub report: ReportOptions,
    /// Jobs run at once by the service.
    pub workers: usize,
}

impl Default for WorkbenchConfig {
    fn default() -> Self {
        Self {
            smoother: SmootherConfig::default(),
            solver: SolverConfig::default(),
            mesh: MeshConfig { n_min: 32 },
            shooter: ShooterConfig::default(),
            report: ReportOptions::default(),
            workers: DEFAULT_WORKERS,
        }
    }
}

impl WorkbenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| WorkbenchError::Input(format!("config: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&morphsim::doc::read_file(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if self.mesh.n_min < 1 {
            return Err(WorkbenchError::Input("config: mesh.n_min must be >= 1".into()));
        }
        if self.workers < 1 {
            return Err(WorkbenchError::Input("config: workers must be >= 1".into()));
        }
        Ok(())
    }
}
