use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The protocol families the scheduler can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    RecallBroadcast,
    PrefixSum,
    ChainOfAgents,
    MajorityVote,
    IterativeQuery,
}

impl Family {
    pub const ALL: [Family; 5] =
        [Family::RecallBroadcast, Family::PrefixSum, Family::ChainOfAgents, Family::MajorityVote, Family::IterativeQuery];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::RecallBroadcast => "recall-broadcast",
            Family::PrefixSum => "prefix-sum",
            Family::ChainOfAgents => "chain-of-agents",
            Family::MajorityVote => "majority-vote",
            Family::IterativeQuery => "iterative-query",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL.into_iter().find(|f| f.as_str() == s).ok_or_else(|| format!("unknown protocol {s:?}"))
    }
}

/// Parameters of one protocol.
///
/// `width` counts the agents the protocol partitions the input over. Recall
/// with `width > 1` adds a dedicated manager, and majority voting uses
/// `replicas` plus a manager, so the DAG width can exceed `width`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub family: Family,
    pub width: usize,
    /// Branching factor of the prefix-sum reduction tree.
    pub branching: usize,
    /// Majority-vote replica count.
    pub replicas: usize,
    /// Recall: only the finder reports (true) or every worker reports (false).
    pub theory_variant: bool,
}

impl ProtocolSpec {
    pub fn recall_broadcast(width: usize, theory_variant: bool) -> Self {
        ProtocolSpec { family: Family::RecallBroadcast, width, branching: 2, replicas: 1, theory_variant }
    }

    pub fn prefix_sum(width: usize, branching: usize) -> Self {
        ProtocolSpec { family: Family::PrefixSum, width, branching, replicas: 1, theory_variant: false }
    }

    pub fn chain_of_agents(width: usize) -> Self {
        ProtocolSpec { family: Family::ChainOfAgents, width, branching: 2, replicas: 1, theory_variant: false }
    }

    pub fn majority_vote(replicas: usize) -> Self {
        ProtocolSpec { family: Family::MajorityVote, width: replicas, branching: 2, replicas, theory_variant: false }
    }

    pub fn iterative_query(width: usize) -> Self {
        ProtocolSpec { family: Family::IterativeQuery, width, branching: 2, replicas: 1, theory_variant: false }
    }
}

impl fmt::Display for ProtocolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::PrefixSum => write!(f, "{} w={} b={}", self.family, self.width, self.branching),
            Family::MajorityVote => write!(f, "{} m={}", self.family, self.replicas),
            Family::RecallBroadcast => write!(
                f,
                "{} w={} {}",
                self.family,
                self.width,
                if self.theory_variant { "theory" } else { "report" }
            ),
            _ => write!(f, "{} w={}", self.family, self.width),
        }
    }
}

/// What an agent does in its protocol, used to pick prompts for remote agents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RoleKind {
    /// Sees a slice of the input.
    Worker,
    /// Aggregates messages and emits the answer.
    Manager,
    /// Solves the whole instance alone (width one, or a majority-vote replica).
    Solo,
}
