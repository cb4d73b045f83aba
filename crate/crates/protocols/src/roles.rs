//! Oracle role programs. Every role reads what it needs from its transcript
//! prefix, so a corrupted symbol propagates exactly as it would through a
//! real agent.

use std::sync::Arc;

use masim_agents::{Action, AgentContext, AgentError};
use masim_core::Symbol;
use masim_tasks::{
    parse_fact_token, parse_pair_token, parse_query_token, parse_subquery_token, query_key, subquery_token, Fact, Monoid,
};

use crate::duty::unparseable;
use crate::{Decision, Duty, Plan, Role, RoleKind, Then};

/// One scheduled step of a state-tracking agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Step {
    /// Emit the running fold extended by chunk element `next`.
    Fold { next: usize, last: bool },
    /// Re-emit the current state.
    Spin,
    Idle,
    /// Send the current state and end the chain.
    SendState { to: usize },
    /// Compose the last `receipts` messages with the own state.
    Compose { receipts: usize, then: Then },
}

pub(crate) struct StateRole {
    pub kind: RoleKind,
    pub monoid: Arc<Monoid>,
    pub steps: Vec<Step>,
}

fn state(ctx: &AgentContext) -> Result<Symbol, AgentError> {
    if let Some(s) = ctx.last_emitted() {
        return Ok(s.clone());
    }
    ctx.chunk_item(0).cloned().ok_or_else(|| unparseable(ctx, "no state: empty chunk and nothing emitted"))
}

fn compose(ctx: &AgentContext, monoid: &Monoid, parts: &[Symbol]) -> Result<Symbol, AgentError> {
    monoid.compose_names(parts).ok_or_else(|| unparseable(ctx, format!("not a {} element in {parts:?}", monoid.name())))
}

impl Role for StateRole {
    fn kind(&self) -> RoleKind {
        self.kind
    }

    fn plan(&self, ctx: &AgentContext) -> Result<Plan, AgentError> {
        let Some(step) = self.steps.get(ctx.time() - 1) else {
            return Ok(Plan::Act(Action::Halt));
        };
        Ok(match *step {
            Step::Fold { next, last } => {
                let x = ctx.chunk_item(next).ok_or_else(|| unparseable(ctx, "fold past end of chunk"))?;
                let expected = compose(ctx, &self.monoid, &[state(ctx)?, x.clone()])?;
                if last {
                    Plan::Decide(Decision { duty: Duty::Fold { elements: ctx.chunk() }, expected, then: Then::Emit })
                } else {
                    Plan::Act(Action::Emit(expected))
                }
            }
            Step::Spin => Plan::Act(Action::Emit(state(ctx)?)),
            Step::Idle => Plan::Act(Action::Halt),
            Step::SendState { to } => Plan::Act(Action::send(state(ctx)?, to)),
            Step::Compose { receipts, then } => {
                let got = ctx.receipts();
                if got.len() < receipts || (receipts > 0 && ctx.received().is_none()) {
                    return Err(unparseable(ctx, format!("expected {receipts} messages, have {}", got.len())));
                }
                let mut parts: Vec<Symbol> = got[got.len() - receipts..].iter().map(|s| (*s).clone()).collect();
                parts.push(state(ctx)?);
                let expected = compose(ctx, &self.monoid, &parts)?;
                Plan::Decide(Decision { duty: Duty::Combine { parts }, expected, then })
            }
        })
    }
}

/// Where a solo program goes once its answer is on the last emitted symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Tail {
    /// Width one: the last emission is the answer.
    Done,
    /// Majority-vote replica `j`: spin `j - 1` steps, then send to the manager.
    Replica { index: usize, manager: usize },
}

fn tail(ctx: &AgentContext, t0: usize, tail: Tail) -> Result<Action, AgentError> {
    match tail {
        Tail::Done => Ok(Action::Halt),
        Tail::Replica { index, manager } => {
            let t = ctx.time();
            let current = || ctx.last_emitted().cloned().ok_or_else(|| unparseable(ctx, "replica has no answer"));
            if t < t0 + index - 1 {
                Ok(Action::Emit(current()?))
            } else if t == t0 + index - 1 {
                Ok(Action::send(current()?, manager))
            } else {
                Ok(Action::Halt)
            }
        }
    }
}

/// State-tracking schedule shared by solo agents and replicas: fold the whole
/// chunk, then either emit the answer edge or hand over to the replica tail.
pub(crate) fn solo_fold_steps(n: usize, tail: Tail) -> Vec<Step> {
    let mut steps: Vec<Step> = (1..n).map(|t| Step::Fold { next: t, last: t + 1 == n }).collect();
    match tail {
        Tail::Done => steps.push(Step::Spin),
        Tail::Replica { index, manager } => {
            steps.extend(std::iter::repeat_n(Step::Spin, index - 1));
            steps.push(Step::SendState { to: manager });
        }
    }
    steps
}

fn recall_chunk(ctx: &AgentContext) -> Result<(Vec<(Symbol, Symbol)>, Symbol), AgentError> {
    let mut pairs = Vec::new();
    let mut query = None;
    for tok in ctx.chunk() {
        if let Some(q) = query_key(&tok) {
            query = Some(q);
        } else {
            pairs.push(parse_pair_token(&tok).ok_or_else(|| unparseable(ctx, format!("bad pair token {tok}")))?);
        }
    }
    Ok((pairs, query.ok_or_else(|| unparseable(ctx, "chunk has no query token"))?))
}

fn lookup(pairs: &[(Symbol, Symbol)], query: &Symbol) -> Symbol {
    pairs.iter().find(|(k, _)| k == query).map(|(_, v)| v.clone()).unwrap_or_else(Symbol::not_found)
}

fn lookup_plan(ctx: &AgentContext) -> Result<Plan, AgentError> {
    let (pairs, query) = recall_chunk(ctx)?;
    let expected = lookup(&pairs, &query);
    Ok(Plan::Decide(Decision { duty: Duty::Lookup { pairs, query }, expected, then: Then::Emit }))
}

/// Recall worker: look up at t = 1, then report.
pub(crate) struct RecallWorker {
    pub manager: usize,
    /// Report time; `None` means the theory variant (finder sends at t = 2).
    pub report_at: Option<usize>,
}

impl Role for RecallWorker {
    fn kind(&self) -> RoleKind {
        RoleKind::Worker
    }

    fn plan(&self, ctx: &AgentContext) -> Result<Plan, AgentError> {
        let t = ctx.time();
        if t == 1 {
            return lookup_plan(ctx);
        }
        let current = ctx.last_emitted().cloned().ok_or_else(|| unparseable(ctx, "nothing looked up"))?;
        Ok(Plan::Act(match self.report_at {
            None => {
                let (pairs, query) = recall_chunk(ctx)?;
                if t == 2 && pairs.iter().any(|(k, _)| *k == query) {
                    Action::send(current, self.manager)
                } else {
                    Action::Halt
                }
            }
            Some(at) if t < at => Action::Emit(current),
            Some(at) if t == at => Action::send(current, self.manager),
            Some(_) => Action::Halt,
        }))
    }
}

/// Recall manager: waits, then copies (theory) or selects among reports.
pub(crate) struct RecallManager {
    /// Number of reports to collect; `None` for the theory variant.
    pub reports: Option<usize>,
}

impl Role for RecallManager {
    fn kind(&self) -> RoleKind {
        RoleKind::Manager
    }

    fn plan(&self, ctx: &AgentContext) -> Result<Plan, AgentError> {
        let t = ctx.time();
        if t == 1 {
            return Ok(Plan::Act(Action::Emit(Symbol::wait())));
        }
        let last = match self.reports {
            None => 3,
            Some(r) => 2 + r,
        };
        if t != last {
            return Ok(Plan::Act(Action::Halt));
        }
        match self.reports {
            None => {
                let v = ctx.received().ok_or_else(|| unparseable(ctx, "no report arrived"))?;
                Ok(Plan::Act(Action::Emit(v.clone())))
            }
            Some(_) => {
                let reports: Vec<Symbol> = ctx.receipts().into_iter().cloned().collect();
                let expected =
                    reports.iter().find(|r| !r.is_not_found()).cloned().unwrap_or_else(Symbol::not_found);
                Ok(Plan::Decide(Decision { duty: Duty::Select { reports }, expected, then: Then::Emit }))
            }
        }
    }
}

/// Recall over the whole input: one lookup, then the optional replica tail.
pub(crate) struct RecallSolo {
    pub tail: Tail,
}

impl Role for RecallSolo {
    fn kind(&self) -> RoleKind {
        RoleKind::Solo
    }

    fn plan(&self, ctx: &AgentContext) -> Result<Plan, AgentError> {
        if ctx.time() == 1 {
            lookup_plan(ctx)
        } else {
            tail(ctx, 2, self.tail).map(Plan::Act)
        }
    }
}

fn khop_chunk(ctx: &AgentContext) -> (Vec<Fact>, Option<(Vec<Symbol>, Symbol)>) {
    let mut facts = Vec::new();
    let mut query = None;
    for tok in ctx.chunk() {
        if let Some(f) = parse_fact_token(&tok) {
            facts.push(f);
        } else if let Some(q) = parse_query_token(&tok) {
            query = Some(q);
        }
    }
    (facts, query)
}

fn resolve(facts: &[Fact], relation: &Symbol, argument: &Symbol) -> Option<Symbol> {
    facts.iter().find(|f| f.relation == *relation && f.argument == *argument).map(|f| f.result.clone())
}

/// k-hop worker: idle at odd steps, answer broadcast subqueries at even steps.
pub(crate) struct KHopWorker {
    pub manager: usize,
}

impl Role for KHopWorker {
    fn kind(&self) -> RoleKind {
        RoleKind::Worker
    }

    fn plan(&self, ctx: &AgentContext) -> Result<Plan, AgentError> {
        let Some(q) = ctx.received() else {
            return Ok(Plan::Act(Action::Halt));
        };
        let (relation, argument) =
            parse_subquery_token(q).ok_or_else(|| unparseable(ctx, format!("bad subquery {q}")))?;
        let (facts, _) = khop_chunk(ctx);
        Ok(match resolve(&facts, &relation, &argument) {
            Some(expected) => Plan::Decide(Decision {
                duty: Duty::Resolve { facts, relation, argument },
                expected,
                then: Then::SendAndContinue { target: self.manager },
            }),
            None => Plan::Act(Action::Emit(Symbol::not_found())),
        })
    }
}

/// k-hop manager: broadcast at odd steps, collect replies, answer after `k`.
pub(crate) struct KHopManager;

impl Role for KHopManager {
    fn kind(&self) -> RoleKind {
        RoleKind::Manager
    }

    fn plan(&self, ctx: &AgentContext) -> Result<Plan, AgentError> {
        let (_, query) = khop_chunk(ctx);
        let (chain, start) = query.ok_or_else(|| unparseable(ctx, "manager chunk has no query"))?;
        let k = chain.len();
        let t = ctx.time();
        if t == 1 {
            let first = subquery_token(&chain[k - 1], &start);
            return Ok(Plan::Act(Action::Broadcast { symbol: first, cot: Some(Symbol::wait()) }));
        }
        let Some(answer) = ctx.received().cloned() else {
            return Ok(Plan::Act(Action::Halt));
        };
        let step = ctx.receipts().len();
        if step >= k {
            return Ok(Plan::Act(Action::Emit(answer)));
        }
        let expected = subquery_token(&chain[k - 1 - step], &answer);
        Ok(Plan::Decide(Decision {
            duty: Duty::NextQuery { chain, start, answer, step },
            expected,
            then: Then::BroadcastAndWait,
        }))
    }
}

/// k-hop over the whole fact list: one hop per step, the last one decided.
pub(crate) struct KHopSolo {
    pub tail: Tail,
}

impl Role for KHopSolo {
    fn kind(&self) -> RoleKind {
        RoleKind::Solo
    }

    fn plan(&self, ctx: &AgentContext) -> Result<Plan, AgentError> {
        let (facts, query) = khop_chunk(ctx);
        let (chain, start) = query.ok_or_else(|| unparseable(ctx, "chunk has no query"))?;
        let k = chain.len();
        let t = ctx.time();
        if t > k {
            return tail(ctx, k + 1, self.tail).map(Plan::Act);
        }
        let current = if t == 1 { start.clone() } else { ctx.last_emitted().cloned().unwrap_or_else(Symbol::not_found) };
        let hop = resolve(&facts, &chain[k - t], &current).unwrap_or_else(Symbol::not_found);
        if t < k {
            return Ok(Plan::Act(Action::Emit(hop)));
        }
        Ok(Plan::Decide(Decision { duty: Duty::Answer { facts, chain, start }, expected: hop, then: Then::Emit }))
    }
}

/// Majority-vote manager: wait, collect `replicas` ballots, emit the plurality.
pub(crate) struct VoteManager {
    /// Step at which replicas hold their answers.
    pub t0: usize,
    pub replicas: usize,
}

/// Most frequent ballot, ties to the lexicographically smallest symbol.
pub fn plurality<'a>(ballots: impl IntoIterator<Item = &'a Symbol>) -> Option<Symbol> {
    let mut counts: std::collections::BTreeMap<&Symbol, usize> = std::collections::BTreeMap::new();
    for b in ballots {
        *counts.entry(b).or_insert(0) += 1;
    }
    let best = counts.values().copied().max()?;
    counts.into_iter().find(|(_, c)| *c == best).map(|(s, _)| s.clone())
}

impl Role for VoteManager {
    fn kind(&self) -> RoleKind {
        RoleKind::Manager
    }

    fn plan(&self, ctx: &AgentContext) -> Result<Plan, AgentError> {
        let t = ctx.time();
        let action = if t < self.t0 {
            Action::Emit(Symbol::wait())
        } else if t < self.t0 + self.replicas {
            Action::Halt
        } else if t == self.t0 + self.replicas {
            let ballots = ctx.receipts();
            Action::Emit(plurality(ballots).ok_or_else(|| unparseable(ctx, "no ballots"))?)
        } else {
            Action::Halt
        };
        Ok(Plan::Act(action))
    }
}
