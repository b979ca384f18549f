//! Experiment runner for covert communication with pinching-antenna waveguides.

pub mod config;
pub mod experiments;
pub mod records;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use config::ConfigError;
use experiments::Output;
use records::Format;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] pass_covert::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl RunError {
    /// 2 for configuration problems, 3 for infeasible designs, 4 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Core(e) if e.is_infeasibility() => 3,
            RunError::Core(_) | RunError::Io { .. } => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    DepCurve,
    DepVsJamming,
    AcrCurve,
    Optimize,
    Validate,
}

pub fn run(experiment: Experiment, cfg: &config::ScenarioConfig) -> Result<Vec<Output>, RunError> {
    match experiment {
        Experiment::DepCurve => experiments::run_dep_vs_tau(cfg),
        Experiment::DepVsJamming => experiments::run_dep_vs_jamming(cfg),
        Experiment::AcrCurve => experiments::run_acr_vs_pc(cfg),
        Experiment::Optimize => experiments::run_optimizer_study(cfg),
        Experiment::Validate => experiments::run_validate(cfg),
    }
}

/// Writes each output under `dir`; tables get the format's extension.
pub fn write_outputs(outputs: &[Output], dir: &Path, format: Format) -> Result<(), RunError> {
    for out in outputs {
        let (path, bytes) = match out {
            Output::Table { name, table } => {
                let mut buf = Vec::new();
                table.write(format, &mut buf).map_err(|e| io_err(dir, e))?;
                (dir.join(format!("{name}.{}", format.extension())), buf)
            }
            Output::Text { name, text } => (dir.join(name), text.clone().into_bytes()),
        };
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
        let file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(&bytes).and_then(|_| w.flush()).map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}

fn io_err(path: &Path, source: io::Error) -> RunError {
    RunError::Io {
        path: path.display().to_string(),
        source,
    }
}
