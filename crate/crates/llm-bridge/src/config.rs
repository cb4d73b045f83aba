use std::str::FromStr;

use masim_protocols::{Duty, Family, RoleKind};
use masim_tasks::TaskKind;
use serde::{Deserialize, Serialize};

use crate::{BridgeError, TemplateId};

/// A fixed template, or the majority-vote prompt of whatever task is running.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TemplateChoice {
    Fixed(TemplateId),
    MajorityAgent,
}

impl FromStr for TemplateChoice {
    type Err = BridgeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "majority_agent" {
            Ok(TemplateChoice::MajorityAgent)
        } else {
            s.parse().map(TemplateChoice::Fixed)
        }
    }
}

impl TryFrom<String> for TemplateChoice {
    type Error = BridgeError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<TemplateChoice> for String {
    fn from(t: TemplateChoice) -> String {
        match t {
            TemplateChoice::Fixed(id) => id.as_str().to_string(),
            TemplateChoice::MajorityAgent => "majority_agent".to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteAgentConfig {
    /// Chat-completions URL.
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub auth_env: String,
    /// Forces one template for every duty; by default it follows the duty.
    #[serde(default)]
    pub template: Option<TemplateChoice>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    /// First retry delay; doubles on each further retry.
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
}

fn default_max_tokens() -> u32 {
    1024
}

fn default_timeout() -> f64 {
    60.0
}

fn default_retries() -> u32 {
    3
}

fn default_backoff() -> u64 {
    500
}

impl RemoteAgentConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>, auth_env: impl Into<String>) -> Self {
        RemoteAgentConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            auth_env: auth_env.into(),
            template: None,
            temperature: 0.0,
            max_tokens: default_max_tokens(),
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            backoff_ms: default_backoff(),
        }
    }

    pub fn validate(&self) -> Result<(), BridgeError> {
        let bad = |m: &str| Err(BridgeError::Config(m.to_string()));
        if !(self.endpoint.starts_with("http://") || self.endpoint.starts_with("https://")) {
            return bad("endpoint must be an http(s) URL");
        }
        if self.model.is_empty() {
            return bad("model is empty");
        }
        if self.auth_env.is_empty() || self.auth_env.contains('=') {
            return bad("auth_env must name an environment variable");
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return bad("temperature must be a non-negative number");
        }
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return bad("timeout_secs must be positive");
        }
        if self.max_tokens == 0 {
            return bad("max_tokens must be positive");
        }
        Ok(())
    }
}

fn majority(task: Option<TaskKind>) -> Option<TemplateId> {
    Some(match task? {
        TaskKind::Recall => TemplateId::RecallMajority,
        TaskKind::Parity => TemplateId::ParityMajority,
        TaskKind::S5 => TemplateId::PermMajority,
        TaskKind::KHop => TemplateId::KhopMajority,
    })
}

/// The template a duty is rendered with when none is forced.
pub fn select_template(duty: &Duty, kind: RoleKind, task: Option<TaskKind>, family: Family) -> Option<TemplateId> {
    use TemplateId as T;
    let s5 = task == Some(TaskKind::S5);
    Some(match duty {
        Duty::Lookup { .. } if kind == RoleKind::Solo => T::RecallMajority,
        Duty::Lookup { .. } => T::RecallWorker,
        Duty::Select { .. } => T::RecallManager,
        Duty::Fold { .. } => match (s5, kind) {
            (false, RoleKind::Solo) => T::ParityMajority,
            (false, _) => T::ParityWorker,
            (true, RoleKind::Solo) => T::PermMajority,
            (true, _) => T::PermWorker,
        },
        Duty::Combine { .. } if s5 => T::PermWorker,
        Duty::Combine { .. } if family == Family::PrefixSum => T::PrefixManager,
        Duty::Combine { .. } => T::ParityManager,
        Duty::Resolve { .. } => T::KhopWorker,
        Duty::Answer { .. } => T::KhopMajority,
        Duty::NextQuery { .. } => T::KhopManager,
    })
}

/// Resolves a forced choice or falls back to [`select_template`].
pub fn resolve_template(
    choice: Option<TemplateChoice>,
    duty: &Duty,
    kind: RoleKind,
    task: Option<TaskKind>,
    family: Family,
) -> Option<TemplateId> {
    match choice {
        Some(TemplateChoice::Fixed(t)) => Some(t),
        Some(TemplateChoice::MajorityAgent) => majority(task),
        None => select_template(duty, kind, task, family),
    }
}
