use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dag::Adjacency;
use crate::{EdgeKind, ExecutionDag, NodeId};

/// Why a node's outgoing edges are not one of the allowed shapes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutgoingProblem {
    /// More than one chain-of-thought edge.
    MultipleCot,
    /// Several communication edges that do not reach every other agent.
    PartialBroadcast,
    /// A broadcast whose copies carry different symbols.
    MixedBroadcastLabels,
    /// Two communication edges to the same agent.
    DuplicateTarget,
}

/// One broken rule, with the offending node or edge (edge indices refer to
/// [`ExecutionDag::edges`]).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    DanglingEdge { edge: usize, missing: NodeId },
    CotShape { edge: usize },
    CommShape { edge: usize },
    IncomingCount { node: NodeId, count: usize },
    Outgoing { node: NodeId, problem: OutgoingProblem },
    WidthExceedsInput { width: usize, input_len: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingEdge { edge, missing } => write!(f, "edge #{edge} touches missing node {missing}"),
            Violation::CotShape { edge } => write!(f, "CoT edge #{edge} must stay on one agent and advance time by one"),
            Violation::CommShape { edge } => {
                write!(f, "communication edge #{edge} must change agent and advance time by one")
            }
            Violation::IncomingCount { node, count } => {
                write!(f, "{node} has {count} incoming edges, expected exactly one")
            }
            Violation::Outgoing { node, problem } => write!(f, "{node} has illegal outgoing edges: {problem:?}"),
            Violation::WidthExceedsInput { width, input_len } => {
                write!(f, "width {width} exceeds input length {input_len}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every structural rule and reports all violations.
///
/// A node may carry one CoT edge together with one message or one complete
/// broadcast (send-and-continue); see the crate README for why.
pub fn validate_dag(dag: &ExecutionDag) -> ValidationReport {
    let mut violations = Vec::new();

    for (k, e) in dag.edges().iter().enumerate() {
        for node in [e.from, e.to] {
            if !dag.contains(node) {
                violations.push(Violation::DanglingEdge { edge: k, missing: node });
            }
        }
        let steps = e.to.time == e.from.time + 1;
        match e.kind {
            EdgeKind::Cot if !(steps && e.from.agent == e.to.agent) => violations.push(Violation::CotShape { edge: k }),
            EdgeKind::Communication if !(steps && e.from.agent != e.to.agent) => {
                violations.push(Violation::CommShape { edge: k })
            }
            _ => {}
        }
    }

    let adj = dag.adjacency();
    for node in dag.nodes() {
        let count = adj.incoming(node).len();
        let expected = usize::from(node.time > 1);
        if count != expected {
            violations.push(Violation::IncomingCount { node, count });
        }
        if let Some(problem) = outgoing_problem(dag, &adj, node) {
            violations.push(Violation::Outgoing { node, problem });
        }
    }

    if dag.width() > dag.input_len() {
        violations.push(Violation::WidthExceedsInput { width: dag.width(), input_len: dag.input_len() });
    }

    ValidationReport { violations }
}

fn outgoing_problem(dag: &ExecutionDag, adj: &Adjacency, node: NodeId) -> Option<OutgoingProblem> {
    let out = adj.outgoing(node);
    let edges = dag.edges();
    let cots = out.iter().filter(|&&k| edges[k].is_cot()).count();
    if cots > 1 {
        return Some(OutgoingProblem::MultipleCot);
    }
    let comms: Vec<usize> = out.iter().copied().filter(|&k| edges[k].is_comm()).collect();
    if comms.len() <= 1 {
        return None;
    }
    let targets: HashSet<usize> = comms.iter().map(|&k| edges[k].to.agent).collect();
    if targets.len() != comms.len() {
        return Some(OutgoingProblem::DuplicateTarget);
    }
    if comms.len() != dag.width() - 1 {
        return Some(OutgoingProblem::PartialBroadcast);
    }
    let first = &edges[comms[0]].symbol;
    if comms.iter().any(|&k| &edges[k].symbol != first) {
        return Some(OutgoingProblem::MixedBroadcastLabels);
    }
    None
}
