//! Config-driven experiments that tie the PEPS and spin-model sides together.

pub mod config;
pub mod report;
pub mod runners;

pub use config::{Budgets, ExperimentConfig, ExperimentKind, LatticeConfig, SCHEMA_VERSION};
pub use report::{Criterion, CsvTable, ExperimentReport};
pub use runners::{
    oracle_scan, run, run_area_law_scan, run_exactness, run_fluctuation_scan,
    run_oracle_validation, run_renyi_n, OracleRow,
};

use crate::error::Error;

/// Process exit code for an outcome: 0 pass, 1 criteria failed, 2 invalid config, 3 budget exceeded.
pub fn exit_code(outcome: &Result<ExperimentReport, Error>) -> i32 {
    match outcome {
        Ok(r) if r.passed() => 0,
        Ok(_) => 1,
        Err(e) if e.is_budget() => 3,
        Err(Error::Config(_)) | Err(Error::Json(_)) => 2,
        Err(_) => 2,
    }
}
