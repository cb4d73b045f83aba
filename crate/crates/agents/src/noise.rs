use std::collections::BTreeSet;

use masim_core::Symbol;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Action, Agent, AgentContext, AgentError};

/// Wraps `agent` so that every emitted or sent symbol belonging to
/// `confusion_set` is replaced, with probability `epsilon`, by a uniform draw
/// from the rest of the set. Symbols outside the set (control symbols such as
/// `WAIT`, queries) pass through. Halt is never corrupted and the action kind
/// never changes.
pub fn with_noise<A: Agent>(
    agent: A,
    epsilon: f64,
    confusion_set: impl IntoIterator<Item = Symbol>,
    seed: u64,
) -> Result<NoisyAgent<A>, AgentError> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(AgentError::InvalidConfig(format!("epsilon {epsilon} outside [0, 1]")));
    }
    let confusion: Vec<Symbol> = confusion_set.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    if epsilon > 0.0 && confusion.is_empty() {
        return Err(AgentError::InvalidConfig("empty confusion set with epsilon > 0".into()));
    }
    Ok(NoisyAgent { inner: agent, epsilon, confusion, rng: ChaCha8Rng::seed_from_u64(seed), corrupted: 0 })
}

pub struct NoisyAgent<A> {
    inner: A,
    epsilon: f64,
    confusion: Vec<Symbol>,
    rng: ChaCha8Rng,
    corrupted: usize,
}

impl<A> NoisyAgent<A> {
    /// Number of symbols replaced so far.
    pub fn corrupted(&self) -> usize {
        self.corrupted
    }

    pub fn inner(&self) -> &A {
        &self.inner
    }

    fn corrupt(&mut self, s: Symbol) -> Symbol {
        let Ok(pos) = self.confusion.binary_search(&s) else {
            return s;
        };
        if self.confusion.len() < 2 || !self.rng.random_bool(self.epsilon) {
            return s;
        }
        let mut k = self.rng.random_range(0..self.confusion.len() - 1);
        if k >= pos {
            k += 1;
        }
        self.corrupted += 1;
        self.confusion[k].clone()
    }
}

impl<A: Agent> Agent for NoisyAgent<A> {
    fn step(&mut self, ctx: &AgentContext) -> Result<Action, AgentError> {
        let action = self.inner.step(ctx)?;
        if self.epsilon == 0.0 {
            return Ok(action);
        }
        Ok(match action {
            Action::Emit(s) => Action::Emit(self.corrupt(s)),
            Action::Send { symbol, target, cot } => {
                let symbol = self.corrupt(symbol);
                let cot = cot.map(|c| self.corrupt(c));
                Action::Send { symbol, target, cot }
            }
            Action::Broadcast { symbol, cot } => {
                let symbol = self.corrupt(symbol);
                let cot = cot.map(|c| self.corrupt(c));
                Action::Broadcast { symbol, cot }
            }
            Action::Halt => Action::Halt,
        })
    }
}
