use std::sync::Arc;

use masim_agents::{with_noise, Action, Agent, AgentContext, AgentError};
use masim_core::Symbol;
use masim_tasks::TaskKind;

use crate::{Plan, ProtocolSpec, Role};

/// What a factory knows about the agent it builds.
pub struct AgentSetup<'a> {
    /// 1-based agent index.
    pub agent: usize,
    pub width: usize,
    pub role: Arc<dyn Role>,
    pub spec: &'a ProtocolSpec,
    pub task: Option<TaskKind>,
    /// The instance's answer alphabet, used as the noise confusion set.
    pub alphabet: &'a [Symbol],
    /// Per-agent seed derived from the run seed.
    pub seed: u64,
}

pub trait AgentFactory: Sync {
    fn make(&self, setup: &AgentSetup<'_>) -> Result<Box<dyn Agent>, AgentError>;
}

/// Executes a role program exactly, answering every duty with the role's
/// own expectation.
pub struct OracleAgent {
    role: Arc<dyn Role>,
}

impl OracleAgent {
    pub fn new(role: Arc<dyn Role>) -> Self {
        OracleAgent { role }
    }
}

impl Agent for OracleAgent {
    fn step(&mut self, ctx: &AgentContext) -> Result<Action, AgentError> {
        Ok(match self.role.plan(ctx)? {
            Plan::Act(a) => a,
            Plan::Decide(d) => d.then.apply(d.expected),
        })
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct OracleFactory;

impl AgentFactory for OracleFactory {
    fn make(&self, setup: &AgentSetup<'_>) -> Result<Box<dyn Agent>, AgentError> {
        Ok(Box::new(OracleAgent::new(setup.role.clone())))
    }
}

/// Oracle agents wrapped in per-symbol noise over the answer alphabet.
#[derive(Clone, Copy, Debug)]
pub struct NoisyFactory {
    pub epsilon: f64,
}

impl AgentFactory for NoisyFactory {
    fn make(&self, setup: &AgentSetup<'_>) -> Result<Box<dyn Agent>, AgentError> {
        let inner = OracleAgent::new(setup.role.clone());
        Ok(Box::new(with_noise(inner, self.epsilon, setup.alphabet.iter().cloned(), setup.seed)?))
    }
}

/// SplitMix64 mix of a base seed and a stream index.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
