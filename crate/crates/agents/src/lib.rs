//! The agent step contract and generic wrappers.
//!
//! An agent sees its transcript so far and returns one [`Action`] per node.
//! Protocol role programs implement [`Agent`] elsewhere; this crate only holds
//! the contract, a noise wrapper and a scripted replay agent.

mod action;
mod context;
mod noise;
mod replay;

pub use action::Action;
pub use context::AgentContext;
pub use noise::{with_noise, NoisyAgent};
pub use replay::ReplayAgent;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    /// The agent could not interpret its context or produced output that does
    /// not parse. The scheduler turns this into a failed run.
    #[error("agent {agent} at step {time}: unparseable: {reason}")]
    Unparseable { agent: usize, time: usize, reason: String },
    /// A backing service failed after all retries.
    #[error("agent {agent} at step {time}: unavailable: {reason}")]
    Unavailable { agent: usize, time: usize, reason: String },
    #[error("agent {agent}: replay script exhausted after {steps} steps")]
    ScriptExhausted { agent: usize, steps: usize },
    #[error("invalid agent configuration: {0}")]
    InvalidConfig(String),
}

/// One agent of a protocol. Called once per node the agent owns.
///
/// Implementations must be `Send` so the scheduler can step agents of one
/// timestep in parallel; any randomness is owned by the agent.
pub trait Agent: Send {
    fn step(&mut self, ctx: &AgentContext) -> Result<Action, AgentError>;
}

impl<A: Agent + ?Sized> Agent for Box<A> {
    fn step(&mut self, ctx: &AgentContext) -> Result<Action, AgentError> {
        (**self).step(ctx)
    }
}

/// Convenience for closures, mostly in tests.
pub struct FnAgent<F>(pub F);

impl<F> Agent for FnAgent<F>
where
    F: FnMut(&AgentContext) -> Result<Action, AgentError> + Send,
{
    fn step(&mut self, ctx: &AgentContext) -> Result<Action, AgentError> {
        (self.0)(ctx)
    }
}
