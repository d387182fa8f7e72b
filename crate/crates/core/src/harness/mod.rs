//! Estimate evaluation, sweeps, convergence studies, verification checks and
//! report output behind the command-line tool.

pub mod checks;
pub mod commands;
pub mod config;
pub mod estimate;
pub mod friedrichs;
pub mod output;
pub mod sweep;

pub use config::{Config, Tolerances};
pub use estimate::{estimate_grid, estimate_terms, evaluate_cases, evaluate_estimate, EstimateCase, EstimateId, EstimateTerms};
pub use friedrichs::{friedrichs_grid, friedrichs_study, FriedrichsOperator, FriedrichsRow, FriedrichsTable, FriedrichsTolerances};
pub use output::Summary;
pub use sweep::{
    derive_seeds, origin_family, run_sweep, run_sweeps, summarize, EstimateReport, GroupMax, RowStatus, SweepOptions,
    SweepRow, SweepSummary,
};
