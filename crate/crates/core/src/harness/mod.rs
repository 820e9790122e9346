//! File I/O, cross-validation over the truncation level and the experiment
//! runner behind the command-line interface.

pub mod cv;
pub mod experiment;
pub mod io;

pub use cv::{cross_validate_k, fit_sparse, CVResult, CvData, FitSettings};
pub use experiment::{
    run_experiment, simulate_scenario, spec_hash, write_report, CellSummary, ExperimentReport,
    ExperimentRow, ExperimentSpec, MetricSummary, Provenance, ScenarioKind, SolverSpec,
};
pub use io::{load_pair_csv, read_matrix_csv, write_matrix_csv, write_vector_csv, LoadedPair};
