use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::BridgeError;

/// One of the fixed prompt suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    RecallMajority,
    RecallWorker,
    RecallManager,
    ParityMajority,
    ParityWorker,
    ParityManager,
    PrefixManager,
    PermMajority,
    PermWorker,
    PermManager,
    PermPrefixWorker,
    PermPrefixManager,
    KhopMajority,
    KhopWorker,
    KhopManager,
}

/// Where a reply's answer is read from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Marker {
    TheAnswerIs,
    Answer,
    NextQuery,
}

impl Marker {
    pub fn text(self) -> &'static str {
        match self {
            Marker::TheAnswerIs => "The answer is:",
            Marker::Answer => "Answer:",
            Marker::NextQuery => "Next Query:",
        }
    }
}

/// What the answer after the marker denotes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnswerKind {
    /// A recall value or NOT_FOUND.
    Value,
    Bit,
    /// A ball-to-bin dictionary.
    Permutation,
    /// A person name or NOT_FOUND.
    Entity,
    /// A single-hop question.
    Question,
}

impl TemplateId {
    pub const ALL: [TemplateId; 15] = [
        TemplateId::RecallMajority,
        TemplateId::RecallWorker,
        TemplateId::RecallManager,
        TemplateId::ParityMajority,
        TemplateId::ParityWorker,
        TemplateId::ParityManager,
        TemplateId::PrefixManager,
        TemplateId::PermMajority,
        TemplateId::PermWorker,
        TemplateId::PermManager,
        TemplateId::PermPrefixWorker,
        TemplateId::PermPrefixManager,
        TemplateId::KhopMajority,
        TemplateId::KhopWorker,
        TemplateId::KhopManager,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::RecallMajority => "recall_majority",
            TemplateId::RecallWorker => "recall_worker",
            TemplateId::RecallManager => "recall_manager",
            TemplateId::ParityMajority => "parity_majority",
            TemplateId::ParityWorker => "parity_worker",
            TemplateId::ParityManager => "parity_manager",
            TemplateId::PrefixManager => "prefix_manager",
            TemplateId::PermMajority => "perm_majority",
            TemplateId::PermWorker => "perm_worker",
            TemplateId::PermManager => "perm_manager",
            TemplateId::PermPrefixWorker => "perm_prefix_worker",
            TemplateId::PermPrefixManager => "perm_prefix_manager",
            TemplateId::KhopMajority => "khop_majority",
            TemplateId::KhopWorker => "khop_worker",
            TemplateId::KhopManager => "khop_manager",
        }
    }

    /// The system prompt, stored verbatim under `prompts/`.
    pub fn system_prompt(self) -> &'static str {
        match self {
            TemplateId::RecallMajority => include_str!("../prompts/recall_majority.txt"),
            TemplateId::RecallWorker => include_str!("../prompts/recall_worker.txt"),
            TemplateId::RecallManager => include_str!("../prompts/recall_manager.txt"),
            TemplateId::ParityMajority => include_str!("../prompts/parity_majority.txt"),
            TemplateId::ParityWorker => include_str!("../prompts/parity_worker.txt"),
            TemplateId::ParityManager => include_str!("../prompts/parity_manager.txt"),
            TemplateId::PrefixManager => include_str!("../prompts/prefix_manager.txt"),
            TemplateId::PermMajority => include_str!("../prompts/perm_majority.txt"),
            TemplateId::PermWorker => include_str!("../prompts/perm_worker.txt"),
            TemplateId::PermManager => include_str!("../prompts/perm_manager.txt"),
            TemplateId::PermPrefixWorker => include_str!("../prompts/perm_prefix_worker.txt"),
            TemplateId::PermPrefixManager => include_str!("../prompts/perm_prefix_manager.txt"),
            TemplateId::KhopMajority => include_str!("../prompts/khop_majority.txt"),
            TemplateId::KhopWorker => include_str!("../prompts/khop_worker.txt"),
            TemplateId::KhopManager => include_str!("../prompts/khop_manager.txt"),
        }
    }

    pub fn marker(self) -> Marker {
        match self {
            TemplateId::KhopMajority | TemplateId::KhopWorker => Marker::Answer,
            TemplateId::KhopManager => Marker::NextQuery,
            _ => Marker::TheAnswerIs,
        }
    }

    pub fn answer_kind(self) -> AnswerKind {
        match self {
            TemplateId::RecallMajority | TemplateId::RecallWorker | TemplateId::RecallManager => AnswerKind::Value,
            TemplateId::ParityMajority
            | TemplateId::ParityWorker
            | TemplateId::ParityManager
            | TemplateId::PrefixManager => AnswerKind::Bit,
            TemplateId::PermMajority
            | TemplateId::PermWorker
            | TemplateId::PermManager
            | TemplateId::PermPrefixWorker
            | TemplateId::PermPrefixManager => AnswerKind::Permutation,
            TemplateId::KhopMajority | TemplateId::KhopWorker => AnswerKind::Entity,
            TemplateId::KhopManager => AnswerKind::Question,
        }
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TemplateId {
    type Err = BridgeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TemplateId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| BridgeError::Config(format!("unknown template {s:?}")))
    }
}
