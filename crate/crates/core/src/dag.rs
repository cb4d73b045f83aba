use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Symbol;

/// Node `T_agent^(time)`. Both indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId {
    pub agent: usize,
    pub time: usize,
}

impl NodeId {
    pub fn new(agent: usize, time: usize) -> Self {
        NodeId { agent, time }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T_{}^({})", self.agent, self.time)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    Cot,
    Communication,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub kind: EdgeKind,
    pub symbol: Symbol,
}

impl Edge {
    pub fn cot(agent: usize, time: usize, symbol: impl Into<Symbol>) -> Self {
        Edge {
            from: NodeId::new(agent, time),
            to: NodeId::new(agent, time + 1),
            kind: EdgeKind::Cot,
            symbol: symbol.into(),
        }
    }

    pub fn comm(from: usize, time: usize, to: usize, symbol: impl Into<Symbol>) -> Self {
        Edge {
            from: NodeId::new(from, time),
            to: NodeId::new(to, time + 1),
            kind: EdgeKind::Communication,
            symbol: symbol.into(),
        }
    }

    pub fn is_cot(&self) -> bool {
        self.kind == EdgeKind::Cot
    }

    pub fn is_comm(&self) -> bool {
        self.kind == EdgeKind::Communication
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DagError {
    #[error("width must be at least 1")]
    ZeroWidth,
    #[error("expected {expected} per-agent entries for {field}, got {got}")]
    LengthMismatch { field: &'static str, expected: usize, got: usize },
    #[error("manager {manager} out of range 1..={width}")]
    ManagerOutOfRange { manager: usize, width: usize },
    #[error("agent {agent} has no nodes (every agent owns at least T_i^(1))")]
    EmptyAgent { agent: usize },
    #[error("edge {index} references {node}, outside agents 1..={width} or time 0")]
    EdgeOutOfRange { index: usize, node: NodeId, width: usize },
}

/// A multi-agent execution DAG.
///
/// Agent `i` owns the nodes `T_i^(1) ..= T_i^(D_i)`; the lengths `D_i` are
/// stored directly, so node contiguity holds by construction. Edges are kept in
/// insertion order. Input chunks are metadata, not nodes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionDag {
    width: usize,
    manager: usize,
    lengths: Vec<usize>,
    edges: Vec<Edge>,
    chunks: Vec<Vec<Symbol>>,
}

impl ExecutionDag {
    /// Builds a DAG after checking that every index is in range. The Def. 1
    /// rules are checked separately by [`crate::validate_dag`].
    pub fn new(
        width: usize,
        manager: usize,
        lengths: Vec<usize>,
        edges: Vec<Edge>,
        chunks: Vec<Vec<Symbol>>,
    ) -> Result<Self, DagError> {
        if width == 0 {
            return Err(DagError::ZeroWidth);
        }
        if lengths.len() != width {
            return Err(DagError::LengthMismatch { field: "lengths", expected: width, got: lengths.len() });
        }
        if chunks.len() != width {
            return Err(DagError::LengthMismatch { field: "chunks", expected: width, got: chunks.len() });
        }
        if manager == 0 || manager > width {
            return Err(DagError::ManagerOutOfRange { manager, width });
        }
        if let Some(i) = lengths.iter().position(|&d| d == 0) {
            return Err(DagError::EmptyAgent { agent: i + 1 });
        }
        for (index, e) in edges.iter().enumerate() {
            for node in [e.from, e.to] {
                if node.agent == 0 || node.agent > width || node.time == 0 {
                    return Err(DagError::EdgeOutOfRange { index, node, width });
                }
            }
        }
        Ok(ExecutionDag { width, manager, lengths, edges, chunks })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn manager(&self) -> usize {
        self.manager
    }

    /// `D_i` for agent `i` (1-based).
    pub fn length(&self, agent: usize) -> usize {
        self.lengths[agent - 1]
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn chunk(&self, agent: usize) -> &[Symbol] {
        &self.chunks[agent - 1]
    }

    pub fn chunks(&self) -> &[Vec<Symbol>] {
        &self.chunks
    }

    pub fn input_len(&self) -> usize {
        self.chunks.iter().map(Vec::len).sum()
    }

    pub fn size(&self) -> usize {
        self.lengths.iter().sum()
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.agent >= 1 && node.agent <= self.width && node.time >= 1 && node.time <= self.lengths[node.agent - 1]
    }

    /// All nodes, ordered by agent then time.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.lengths
            .iter()
            .enumerate()
            .flat_map(|(i, &d)| (1..=d).map(move |t| NodeId::new(i + 1, t)))
    }

    /// Index of edges by source and by target node, `[agent-1][time-1]`.
    pub(crate) fn adjacency(&self) -> Adjacency {
        let mut out: Vec<Vec<Vec<usize>>> = self.lengths.iter().map(|&d| vec![Vec::new(); d]).collect();
        let mut inc: Vec<Vec<Vec<usize>>> = out.clone();
        for (k, e) in self.edges.iter().enumerate() {
            if self.contains(e.from) {
                out[e.from.agent - 1][e.from.time - 1].push(k);
            }
            if self.contains(e.to) {
                inc[e.to.agent - 1][e.to.time - 1].push(k);
            }
        }
        Adjacency { out, inc }
    }
}

pub(crate) struct Adjacency {
    pub out: Vec<Vec<Vec<usize>>>,
    pub inc: Vec<Vec<Vec<usize>>>,
}

impl Adjacency {
    pub fn outgoing(&self, n: NodeId) -> &[usize] {
        &self.out[n.agent - 1][n.time - 1]
    }

    pub fn incoming(&self, n: NodeId) -> &[usize] {
        &self.inc[n.agent - 1][n.time - 1]
    }
}
