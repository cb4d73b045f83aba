use std::fmt;
use std::str::FromStr;

use masim_core::Symbol;

use crate::{
    gen_khop, gen_recall, gen_swap_word, gen_word, oracle_fold, oracle_khop, oracle_recall, KHopInstance, Monoid,
    RecallInstance, StateTrackingInstance, TaskError,
};

/// Task family as named on the command line and in CSV output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TaskKind {
    Recall,
    Parity,
    S5,
    KHop,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Recall => "recall",
            TaskKind::Parity => "parity",
            TaskKind::S5 => "s5",
            TaskKind::KHop => "khop",
        }
    }

    pub fn is_state_tracking(self) -> bool {
        matches!(self, TaskKind::Parity | TaskKind::S5)
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "recall" => Ok(TaskKind::Recall),
            "parity" => Ok(TaskKind::Parity),
            "s5" => Ok(TaskKind::S5),
            "khop" => Ok(TaskKind::KHop),
            other => Err(format!("unknown task family {other:?} (expected recall, parity, s5 or khop)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TaskInstance {
    Recall(RecallInstance),
    StateTracking(StateTrackingInstance),
    KHop(KHopInstance),
}

impl TaskInstance {
    /// `None` for state tracking over a monoid other than parity or S5.
    pub fn kind(&self) -> Option<TaskKind> {
        match self {
            TaskInstance::Recall(_) => Some(TaskKind::Recall),
            TaskInstance::KHop(_) => Some(TaskKind::KHop),
            TaskInstance::StateTracking(s) => match s.monoid().name() {
                "parity" => Some(TaskKind::Parity),
                "s5" => Some(TaskKind::S5),
                _ => None,
            },
        }
    }

    pub fn oracle_answer(&self) -> Symbol {
        match self {
            TaskInstance::Recall(r) => oracle_recall(r),
            TaskInstance::StateTracking(s) => s.monoid().element(oracle_fold(s)).clone(),
            TaskInstance::KHop(h) => oracle_khop(h),
        }
    }

    /// Input length N: pairs, word length, or facts.
    pub fn n(&self) -> usize {
        match self {
            TaskInstance::Recall(r) => r.n(),
            TaskInstance::StateTracking(s) => s.len(),
            TaskInstance::KHop(h) => h.facts().len(),
        }
    }

    /// Hop count for k-hop instances, 0 otherwise.
    pub fn k(&self) -> usize {
        match self {
            TaskInstance::KHop(h) => h.k(),
            _ => 0,
        }
    }

    /// Symbols an agent might plausibly emit for this task; the default
    /// confusion set for noise injection.
    pub fn answer_alphabet(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = match self {
            TaskInstance::Recall(r) => r.pairs().iter().map(|(_, v)| v.clone()).collect(),
            TaskInstance::StateTracking(s) => s.monoid().elements().to_vec(),
            TaskInstance::KHop(h) => h.entities().to_vec(),
        };
        if !matches!(self, TaskInstance::StateTracking(_)) {
            out.push(Symbol::not_found());
        }
        out.sort();
        out.dedup();
        out
    }
}

/// Generator parameters for one instance of a family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceParams {
    pub kind: TaskKind,
    /// Pairs (recall), word length (parity, S5 swaps), or facts (k-hop).
    pub n: usize,
    /// Hops (k-hop only).
    pub k: usize,
    /// Key/value alphabet size (recall only). Defaults to `4 * n` when zero.
    pub alphabet: usize,
    pub entities: usize,
    pub relations: usize,
    /// Round odd S5 swap counts up to stay in A5.
    pub force_even: bool,
}

impl InstanceParams {
    pub fn new(kind: TaskKind, n: usize) -> Self {
        InstanceParams { kind, n, k: 0, alphabet: 0, entities: 50, relations: 20, force_even: false }
    }

    pub fn generate(&self, seed: u64) -> Result<TaskInstance, TaskError> {
        Ok(match self.kind {
            TaskKind::Recall => {
                let alphabet = if self.alphabet == 0 { 4 * self.n.max(1) } else { self.alphabet };
                TaskInstance::Recall(gen_recall(self.n, alphabet, seed)?)
            }
            TaskKind::Parity => TaskInstance::StateTracking(gen_word(Monoid::shared_parity(), self.n, seed)),
            TaskKind::S5 => TaskInstance::StateTracking(gen_swap_word(self.n, seed, self.force_even)),
            TaskKind::KHop => TaskInstance::KHop(gen_khop(self.n, self.k, self.entities, self.relations, seed)?),
        })
    }
}
