//! Chat-completion agents.
//!
//! A [`RemoteAgent`] runs its protocol role program locally and hands every
//! content decision to a model: the duty is rendered with one of the fixed
//! prompt suites under `prompts/`, sent through a [`Transport`], and the
//! reply is parsed back into a symbol. Tests use [`ScriptedTransport`]; only
//! [`HttpTransport`] opens connections.

mod agent;
mod config;
mod parse;
mod render;
mod template;
mod transport;

use thiserror::Error;

pub use agent::{AuditLog, AuditRecord, RemoteAgent, RemoteFactory};
pub use config::{resolve_template, select_template, RemoteAgentConfig, TemplateChoice};
pub use parse::{after_marker, parse_answer};
pub use render::{render_prompt, render_response, render_user, swap_sequence, Message, Role};
pub use template::{AnswerKind, Marker, TemplateId};
pub use transport::{
    decode_completion, encode_request, ChatRequest, ChatResponse, FnTransport, HttpTransport, ScriptedTransport,
    Transport, TransportError, Usage,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BridgeError {
    #[error("template {template} cannot render a {duty} duty")]
    Incompatible { template: TemplateId, duty: &'static str },
    #[error("template {0}: empty input")]
    EmptyInput(TemplateId),
    #[error("template {template} cannot state the answer {answer:?}")]
    Unrenderable { template: TemplateId, answer: String },
    #[error("invalid remote agent configuration: {0}")]
    Config(String),
}
