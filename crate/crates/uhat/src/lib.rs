//! Causally masked unique-hard-attention layers and explicit constructions
//! of a recall worker and a recall manager.
//!
//! Feed-forward blocks are evaluated as the case tables they compute rather
//! than as ReLU networks. Every attention selection the output depends on is
//! checked against a minimum score gap, so floating-point rounding cannot
//! silently flip a choice.

mod jl;
mod network;
mod recall;
mod select;
mod verify;

use thiserror::Error;

pub use jl::{jl_vectors, jl_vectors_with, JlConfig, JlVectorSet, JL_THRESHOLD};
pub use network::{FeedForward, HardAttentionLayer, Head, Linear, Network, Trace};
pub use recall::{
    build_manager_network, build_manager_network_with, build_recall_network, build_recall_network_with,
    ManagerNetwork, RecallAlphabet, RecallNetwork, RecallOptions, DECODE_MARGIN, RETRIEVAL_MARGIN,
};
pub use select::{rightmost_argmax, select_with_gap, uhat_select};
pub use verify::{alphabet_size, random_chunk, scan_recall, verify, Tally, VerifyConfig, VerifyReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UhatError {
    #[error("attention row is empty")]
    EmptyRow,
    #[error("no J-L vector {index} of dimension {dim} within {trials} draws; raise the dimension constant")]
    MaxTrialsExceeded { index: usize, dim: usize, trials: usize },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("symbol {0:?} is not in the network's alphabet")]
    UnknownSymbol(String),
    #[error("network expects {expected} items, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("layer {layer} head {head} row {row}: score gap {gap:e} below {required:e}")]
    Margin { layer: usize, head: usize, row: usize, gap: f64, required: f64 },
}
