//! Closed-form complexity bounds per task family, a checker for measured
//! metrics, and parameter sweeps with Pareto extraction.

mod check;
mod formula;
mod sweep;

use masim_protocols::ProtocolError;
use masim_tasks::TaskError;
use thiserror::Error;

pub use check::{bound_family, check, check_metrics, BoundReport, MetricCheck, Verdict};
pub use formula::{
    ceil_log, table1_bounds, table1_bounds_with, Bound, BoundConstants, BoundFamily, BoundParams, BoundSpec, Kind,
    Slack,
};
pub use sweep::{
    cell_seed, cell_spec, pareto_frontier, pareto_rows, read_csv, sweep, write_csv, write_rows, Cell, CsvRow, SweepConfig,
    SweepRecord, CSV_HEADER,
};

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("no bounds for family {0:?}")]
    UnknownFamily(String),
    #[error("{protocol} is not checked against {family} bounds")]
    FamilyMismatch { protocol: String, family: BoundFamily },
    #[error("invalid bound parameters: {0}")]
    InvalidParams(String),
    #[error("sweep grid has no cells")]
    EmptyGrid,
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
