use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use masim_agents::{Action, Agent, AgentContext, AgentError};
use masim_core::Symbol;
use masim_protocols::{AgentFactory, AgentSetup, Family, Plan, Role, RoleKind};
use masim_tasks::TaskKind;
use serde::{Deserialize, Serialize};

use crate::{
    parse_answer, render_prompt, resolve_template, ChatRequest, RemoteAgentConfig, TemplateId, Transport,
    TransportError, Usage,
};

/// One model call, as written to the audit log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub agent: usize,
    pub time: usize,
    pub template: TemplateId,
    /// 0 for the first try.
    pub attempt: u32,
    pub request: ChatRequest,
    pub response: Option<String>,
    pub error: Option<TransportError>,
    pub usage: Option<Usage>,
    /// The parsed answer, absent when the call failed or did not parse.
    pub answer: Option<String>,
    /// What the role program expected; lets an audit score each node.
    pub expected: String,
}

/// Shared, ordered record of every model call in a run.
#[derive(Clone, Default)]
pub struct AuditLog {
    records: Arc<Mutex<Vec<AuditRecord>>>,
}

impl AuditLog {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&self, record: AuditRecord) {
        self.records.lock().unwrap().push(record);
    }

    /// Records sorted by (time, agent, attempt), independent of call interleaving.
    pub fn records(&self) -> Vec<AuditRecord> {
        let mut r = self.records.lock().unwrap().clone();
        r.sort_by_key(|a| (a.time, a.agent, a.attempt));
        r
    }

    pub fn len(&self) -> usize {
        self.records.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn completion_tokens(&self) -> u64 {
        self.records.lock().unwrap().iter().filter_map(|r| r.usage).map(|u| u.completion_tokens).sum()
    }

    /// One JSON object per line.
    pub fn write_ndjson(&self, path: &Path) -> std::io::Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        for r in self.records() {
            serde_json::to_writer(&mut out, &r)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }
}

/// An agent that runs its role program locally and asks a model for every
/// content decision.
pub struct RemoteAgent {
    role: Arc<dyn Role>,
    kind: RoleKind,
    task: Option<TaskKind>,
    family: Family,
    config: RemoteAgentConfig,
    transport: Arc<dyn Transport>,
    audit: AuditLog,
}

impl RemoteAgent {
    pub fn new(
        setup: &AgentSetup<'_>,
        config: RemoteAgentConfig,
        transport: Arc<dyn Transport>,
        audit: AuditLog,
    ) -> Self {
        RemoteAgent {
            role: setup.role.clone(),
            kind: setup.role.kind(),
            task: setup.task,
            family: setup.spec.family,
            config,
            transport,
            audit,
        }
    }

    fn backoff(&self, attempt: u32) -> Duration {
        Duration::from_millis(self.config.backoff_ms.saturating_mul(1u64 << attempt.min(16)))
    }
}

impl Agent for RemoteAgent {
    fn step(&mut self, ctx: &AgentContext) -> Result<Action, AgentError> {
        let decision = match self.role.plan(ctx)? {
            Plan::Act(a) => return Ok(a),
            Plan::Decide(d) => d,
        };
        let (agent, time) = (ctx.self_id(), ctx.time());
        let unparseable = |reason: String| AgentError::Unparseable { agent, time, reason };
        let template = resolve_template(self.config.template, &decision.duty, self.kind, self.task, self.family)
            .ok_or_else(|| unparseable(format!("no template for {} duty", decision.duty.name())))?;
        let messages = render_prompt(template, &decision.duty).map_err(|e| unparseable(e.to_string()))?;
        let request = ChatRequest {
            model: self.config.model.clone(),
            messages,
            temperature: self.config.temperature,
            max_tokens: self.config.max_tokens,
        };
        let mut attempt = 0;
        loop {
            let mut record = AuditRecord {
                agent,
                time,
                template,
                attempt,
                request: request.clone(),
                response: None,
                error: None,
                usage: None,
                answer: None,
                expected: decision.expected.to_string(),
            };
            match self.transport.complete(&request) {
                Ok(resp) => {
                    let parsed = parse_answer(&resp.content, template);
                    record.answer = parsed.as_ref().ok().map(Symbol::to_string);
                    record.response = Some(resp.content);
                    record.usage = resp.usage;
                    self.audit.push(record);
                    return parsed.map(|s| decision.then.apply(s)).map_err(unparseable);
                }
                Err(e) => {
                    let retry = e.retryable() && attempt < self.config.max_retries;
                    let reason = e.to_string();
                    record.error = Some(e);
                    self.audit.push(record);
                    if !retry {
                        return Err(AgentError::Unavailable {
                            agent,
                            time,
                            reason: format!("{reason} after {} attempt(s)", attempt + 1),
                        });
                    }
                    thread::sleep(self.backoff(attempt));
                    attempt += 1;
                }
            }
        }
    }
}

/// Builds a [`RemoteAgent`] for every agent of a protocol, all sharing one
/// transport and one audit log.
pub struct RemoteFactory {
    pub config: RemoteAgentConfig,
    pub transport: Arc<dyn Transport>,
    pub audit: AuditLog,
}

impl RemoteFactory {
    pub fn new(config: RemoteAgentConfig, transport: Arc<dyn Transport>) -> Self {
        RemoteFactory { config, transport, audit: AuditLog::new() }
    }
}

impl AgentFactory for RemoteFactory {
    fn make(&self, setup: &AgentSetup<'_>) -> Result<Box<dyn Agent>, AgentError> {
        self.config.validate().map_err(|e| AgentError::InvalidConfig(e.to_string()))?;
        Ok(Box::new(RemoteAgent::new(setup, self.config.clone(), self.transport.clone(), self.audit.clone())))
    }
}
