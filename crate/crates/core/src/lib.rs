//! Execution DAGs for multi-agent protocols.
//!
//! An [`ExecutionDag`] records which agent produced which token at which
//! timestep. Nodes are `T_i^(t)`; edges are either chain-of-thought steps within
//! one agent or messages to another agent's next step. This crate validates the
//! structural rules, measures depth/size/width/communication budget, builds the
//! per-agent transcripts, and converts a multi-agent run into an equivalent
//! single-agent chain.

mod convert;
mod dag;
mod metrics;
mod symbol;
mod text;
mod token;
mod transcript;
mod validate;

pub use convert::to_single_agent;
pub use dag::{DagError, Edge, EdgeKind, ExecutionDag, NodeId};
pub use metrics::{answer, measure, Metrics, MetricsError};
pub use symbol::Symbol;
pub use text::{from_text, to_text, TextError};
pub use token::Token;
pub use transcript::{reconstruct, transcript, TranscriptError};
pub use validate::{validate_dag, OutgoingProblem, ValidationReport, Violation};
