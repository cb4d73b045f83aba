use masim_core::Symbol;

/// What an agent does at one node.
///
/// `Emit` is a CoT edge to the agent's next node. `Send` and `Broadcast` add
/// communication edges and may also continue the agent's own chain with a CoT
/// symbol. `Halt` leaves the node without outgoing edges; the chain resumes
/// only if a message arrives at the next step.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Emit(Symbol),
    Send { symbol: Symbol, target: usize, cot: Option<Symbol> },
    Broadcast { symbol: Symbol, cot: Option<Symbol> },
    Halt,
}

impl Action {
    pub fn emit(symbol: impl Into<Symbol>) -> Self {
        Action::Emit(symbol.into())
    }

    pub fn send(symbol: impl Into<Symbol>, target: usize) -> Self {
        Action::Send { symbol: symbol.into(), target, cot: None }
    }

    pub fn send_and_continue(symbol: impl Into<Symbol>, target: usize, cot: impl Into<Symbol>) -> Self {
        Action::Send { symbol: symbol.into(), target, cot: Some(cot.into()) }
    }

    pub fn broadcast(symbol: impl Into<Symbol>) -> Self {
        Action::Broadcast { symbol: symbol.into(), cot: None }
    }

    pub fn broadcast_and_continue(symbol: impl Into<Symbol>, cot: impl Into<Symbol>) -> Self {
        Action::Broadcast { symbol: symbol.into(), cot: Some(cot.into()) }
    }

    /// The message or emitted symbol, if any.
    pub fn symbol(&self) -> Option<&Symbol> {
        match self {
            Action::Emit(s) | Action::Send { symbol: s, .. } | Action::Broadcast { symbol: s, .. } => Some(s),
            Action::Halt => None,
        }
    }

    pub fn target(&self) -> Option<usize> {
        match self {
            Action::Send { target, .. } => Some(*target),
            _ => None,
        }
    }

    /// The CoT symbol continuing the agent's own chain, if any.
    pub fn cot(&self) -> Option<&Symbol> {
        match self {
            Action::Emit(s) => Some(s),
            Action::Send { cot, .. } | Action::Broadcast { cot, .. } => cot.as_ref(),
            Action::Halt => None,
        }
    }

    pub fn same_kind(&self, other: &Action) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
            && self.target() == other.target()
            && self.cot().is_some() == other.cot().is_some()
    }
}
