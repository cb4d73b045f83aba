use masim_agents::AgentError;
use masim_core::{answer, measure, DagError, ExecutionDag, Metrics, MetricsError, Symbol};
use masim_tasks::TaskInstance;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{derive_seed, execute, layout, AgentFactory, AgentSetup, Family, ProtocolSpec};

/// Bugs in a protocol or its parameters. These abort the run.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("{family} cannot run on {task} instances")]
    Incompatible { family: Family, task: String },
    #[error("invalid protocol parameters: {0}")]
    InvalidSpec(String),
    #[error("two edges enter node T_{agent}^({time})")]
    InboxCollision { agent: usize, time: usize },
    #[error("agent {from} at step {time} sent to agent {to}, whose chain has ended")]
    DeadRecipient { from: usize, to: usize, time: usize },
    #[error("agent {from} at step {time} addressed invalid agent {to}")]
    InvalidTarget { from: usize, to: usize, time: usize },
    #[error("building agent: {0}")]
    Agent(AgentError),
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Why a run produced no usable answer. Failed runs count as incorrect.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunFailure {
    #[error(transparent)]
    Agent(AgentError),
    #[error("the manager never emitted an answer")]
    NoAnswer,
    #[error("the manager was still waiting when the run ended")]
    Waiting,
    #[error("still running after {horizon} steps")]
    StepLimit { horizon: usize },
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub spec: ProtocolSpec,
    pub seed: u64,
    pub dag: ExecutionDag,
    pub answer: Option<Symbol>,
    pub metrics: Metrics,
    pub correct: bool,
    pub oracle_answer: Symbol,
    pub failure: Option<RunFailure>,
}

/// Flat per-run record for logs and sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub protocol: Family,
    pub width: usize,
    pub branching: usize,
    pub replicas: usize,
    pub theory_variant: bool,
    pub task: String,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub dag_width: usize,
    pub depth: usize,
    pub size: usize,
    pub comm_budget: usize,
    pub answer: Option<String>,
    pub oracle_answer: String,
    pub correct: bool,
    pub failure: Option<String>,
}

impl RunResult {
    pub fn record(&self, instance: &TaskInstance) -> RunRecord {
        RunRecord {
            protocol: self.spec.family,
            width: self.spec.width,
            branching: self.spec.branching,
            replicas: self.spec.replicas,
            theory_variant: self.spec.theory_variant,
            task: instance.kind().map(|k| k.as_str().to_string()).unwrap_or_else(|| "custom".into()),
            n: instance.n(),
            k: instance.k(),
            seed: self.seed,
            dag_width: self.metrics.width,
            depth: self.metrics.depth,
            size: self.metrics.size,
            comm_budget: self.metrics.comm_budget,
            answer: self.answer.as_ref().map(|a| a.to_string()),
            oracle_answer: self.oracle_answer.to_string(),
            correct: self.correct,
            failure: self.failure.as_ref().map(|f| f.to_string()),
        }
    }
}

/// Lays out `spec` on `instance`, builds one agent per row with `factory`,
/// executes, validates and measures.
pub fn run(
    spec: &ProtocolSpec,
    instance: &TaskInstance,
    factory: &dyn AgentFactory,
    seed: u64,
) -> Result<RunResult, ProtocolError> {
    let layout = layout(spec, instance)?;
    let alphabet = instance.answer_alphabet();
    let task = instance.kind();
    let agents = (1..=layout.width)
        .map(|agent| {
            factory.make(&AgentSetup {
                agent,
                width: layout.width,
                role: layout.role(agent).clone(),
                spec,
                task,
                alphabet: &alphabet,
                seed: derive_seed(seed, agent as u64),
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(ProtocolError::Agent)?;
    let exec = execute(&layout, agents)?;
    let metrics = measure(&exec.dag)?;
    let oracle_answer = instance.oracle_answer();
    let (answer, failure) = match exec.failure {
        Some(f) => (None, Some(f)),
        None => match answer(&exec.dag) {
            Ok(a) if a.is_wait() => (None, Some(RunFailure::Waiting)),
            Ok(a) => (Some(a), None),
            Err(_) => (None, Some(RunFailure::NoAnswer)),
        },
    };
    let correct = answer.as_ref() == Some(&oracle_answer);
    Ok(RunResult { spec: *spec, seed, dag: exec.dag, answer, metrics, correct, oracle_answer, failure })
}
