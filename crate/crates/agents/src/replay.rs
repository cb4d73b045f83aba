use std::collections::VecDeque;

use crate::{Action, Agent, AgentContext, AgentError};

/// Plays back a fixed list of actions, one per call, ignoring the context.
#[derive(Clone, Debug)]
pub struct ReplayAgent {
    script: VecDeque<Action>,
    played: usize,
}

impl ReplayAgent {
    pub fn new(script: impl IntoIterator<Item = Action>) -> Self {
        ReplayAgent { script: script.into_iter().collect(), played: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.script.len()
    }
}

impl Agent for ReplayAgent {
    fn step(&mut self, ctx: &AgentContext) -> Result<Action, AgentError> {
        let action = self
            .script
            .pop_front()
            .ok_or(AgentError::ScriptExhausted { agent: ctx.self_id(), steps: self.played })?;
        self.played += 1;
        Ok(action)
    }
}
