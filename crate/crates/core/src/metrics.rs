use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{validate_dag, ExecutionDag, NodeId, Symbol, ValidationReport};

/// Complexity measures of one execution DAG.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    /// Edges on the longest directed path.
    pub depth: usize,
    pub width: usize,
    /// Node count.
    pub size: usize,
    /// Nodes with at least one outgoing communication edge.
    pub comm_budget: usize,
}

impl Metrics {
    /// Node form of the depth/size inequality: `size / width <= depth + 1`.
    pub fn satisfies_depth_size_inequality(&self) -> bool {
        self.size <= self.width * (self.depth + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("DAG is not valid:\n{0}")]
    Invalid(ValidationReport),
    #[error("manager agent {0} emitted no CoT edge")]
    NoAnswer(usize),
}

/// Measures a DAG, validating it first.
pub fn measure(dag: &ExecutionDag) -> Result<Metrics, MetricsError> {
    let report = validate_dag(dag);
    if !report.is_ok() {
        return Err(MetricsError::Invalid(report));
    }
    Ok(measure_unchecked(dag))
}

pub(crate) fn measure_unchecked(dag: &ExecutionDag) -> Metrics {
    // Every edge advances time by one, so visiting edges by source time is a
    // topological order.
    let mut order: Vec<usize> = (0..dag.edges().len()).collect();
    order.sort_by_key(|&k| dag.edges()[k].from.time);
    let mut longest: Vec<Vec<usize>> = dag.lengths().iter().map(|&d| vec![0; d]).collect();
    let mut depth = 0;
    for k in order {
        let e = &dag.edges()[k];
        let here = longest[e.from.agent - 1][e.from.time - 1] + 1;
        let slot = &mut longest[e.to.agent - 1][e.to.time - 1];
        if here > *slot {
            *slot = here;
            depth = depth.max(here);
        }
    }
    let senders: HashSet<NodeId> = dag.edges().iter().filter(|e| e.is_comm()).map(|e| e.from).collect();
    Metrics { depth, width: dag.width(), size: dag.size(), comm_budget: senders.len() }
}

/// The symbol on the manager's latest outgoing CoT edge.
pub fn answer(dag: &ExecutionDag) -> Result<Symbol, MetricsError> {
    let m = dag.manager();
    dag.edges()
        .iter()
        .filter(|e| e.is_cot() && e.from.agent == m)
        .max_by_key(|e| e.from.time)
        .map(|e| e.symbol.clone())
        .ok_or(MetricsError::NoAnswer(m))
}
