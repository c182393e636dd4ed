//! Project persistence, pipeline orchestration, CLI and local HTTP API on
//! top of `morphsim`.

pub mod cli;
pub mod config;
pub mod error;
pub mod jobs;
pub mod pipeline;
pub mod project;
pub mod service;

pub use error::{Result, WorkbenchError};
pub use morphsim;
