use masim_agents::{Action, AgentContext, AgentError};
use masim_core::Symbol;
use masim_tasks::Fact;

use crate::RoleKind;

/// A content decision a role needs at one node. Oracle agents answer with
/// [`Decision::expected`]; remote agents render the duty as a prompt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Duty {
    /// Value stored under `query`, or `NOT_FOUND`.
    Lookup { pairs: Vec<(Symbol, Symbol)>, query: Symbol },
    /// The one report that is not `NOT_FOUND`.
    Select { reports: Vec<Symbol> },
    /// Fold a word over the task monoid.
    Fold { elements: Vec<Symbol> },
    /// Compose partial results in order.
    Combine { parts: Vec<Symbol> },
    /// `relation(argument)` against a fact list, or `NOT_FOUND`.
    Resolve { facts: Vec<Fact>, relation: Symbol, argument: Symbol },
    /// The whole k-hop query against a fact list.
    Answer { facts: Vec<Fact>, chain: Vec<Symbol>, start: Symbol },
    /// The next single-hop query once hop `step` resolved to `answer`.
    NextQuery { chain: Vec<Symbol>, start: Symbol, answer: Symbol, step: usize },
}

impl Duty {
    pub fn name(&self) -> &'static str {
        match self {
            Duty::Lookup { .. } => "lookup",
            Duty::Select { .. } => "select",
            Duty::Fold { .. } => "fold",
            Duty::Combine { .. } => "combine",
            Duty::Resolve { .. } => "resolve",
            Duty::Answer { .. } => "answer",
            Duty::NextQuery { .. } => "next-query",
        }
    }
}

/// How the decided symbol becomes an action.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Then {
    Emit,
    Send { target: usize },
    SendAndContinue { target: usize },
    BroadcastAndWait,
}

impl Then {
    pub fn apply(self, symbol: Symbol) -> Action {
        match self {
            Then::Emit => Action::Emit(symbol),
            Then::Send { target } => Action::Send { symbol, target, cot: None },
            Then::SendAndContinue { target } => Action::Send { symbol: symbol.clone(), target, cot: Some(symbol) },
            Then::BroadcastAndWait => Action::Broadcast { symbol, cot: Some(Symbol::wait()) },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub duty: Duty,
    /// What the role program computes from its own transcript.
    pub expected: Symbol,
    pub then: Then,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Plan {
    Act(Action),
    Decide(Decision),
}

/// A protocol role: a deterministic program from transcript prefix to plan.
pub trait Role: Send + Sync {
    fn kind(&self) -> RoleKind;
    fn plan(&self, ctx: &AgentContext) -> Result<Plan, AgentError>;
}

pub(crate) fn unparseable(ctx: &AgentContext, reason: impl Into<String>) -> AgentError {
    AgentError::Unparseable { agent: ctx.self_id(), time: ctx.time(), reason: reason.into() }
}
