use std::sync::Arc;

use masim_core::Symbol;
use masim_tasks::{fact_token, pair_token, partition, query_token, recall_query_token, Monoid, TaskInstance};

use crate::roles::{
    solo_fold_steps, KHopManager, KHopSolo, KHopWorker, RecallManager, RecallSolo, RecallWorker, StateRole, Step,
    Tail, VoteManager,
};
use crate::{Family, ProtocolError, ProtocolSpec, Role, RoleKind, Then};

/// Everything the scheduler needs to run one protocol on one instance.
pub struct Layout {
    pub spec: ProtocolSpec,
    pub width: usize,
    pub manager: usize,
    pub chunks: Vec<Vec<Symbol>>,
    pub roles: Vec<Arc<dyn Role>>,
    /// Steps after which a still-running protocol counts as stuck.
    pub horizon: usize,
}

impl Layout {
    pub fn role(&self, agent: usize) -> &Arc<dyn Role> {
        &self.roles[agent - 1]
    }
}

fn recall_tokens(pairs: &[(Symbol, Symbol)]) -> Vec<Symbol> {
    pairs.iter().map(|(k, v)| pair_token(k, v)).collect()
}

fn incompatible(spec: &ProtocolSpec, what: &str) -> ProtocolError {
    ProtocolError::Incompatible { family: spec.family, task: what.to_string() }
}

fn invalid(msg: String) -> ProtocolError {
    ProtocolError::InvalidSpec(msg)
}

pub fn layout(spec: &ProtocolSpec, instance: &TaskInstance) -> Result<Layout, ProtocolError> {
    let w = spec.width;
    if w == 0 {
        return Err(invalid("width must be at least 1".into()));
    }
    match (spec.family, instance) {
        (Family::RecallBroadcast, TaskInstance::Recall(r)) => {
            let n = r.n();
            if w > n {
                return Err(invalid(format!("recall width {w} exceeds {n} pairs")));
            }
            let query = recall_query_token(r.query());
            if w == 1 {
                let mut chunk = recall_tokens(r.pairs());
                chunk.push(query);
                let role: Arc<dyn Role> = Arc::new(RecallSolo { tail: Tail::Done });
                return Ok(Layout { spec: *spec, width: 1, manager: 1, chunks: vec![chunk], roles: vec![role], horizon: 4 });
            }
            let manager = w + 1;
            let mut chunks = Vec::with_capacity(w + 1);
            let mut roles: Vec<Arc<dyn Role>> = Vec::with_capacity(w + 1);
            for (i, range) in partition(n, w).into_iter().enumerate() {
                let mut chunk = recall_tokens(&r.pairs()[range]);
                chunk.push(query.clone());
                chunks.push(chunk);
                let report_at = (!spec.theory_variant).then_some(i + 2);
                roles.push(Arc::new(RecallWorker { manager, report_at }));
            }
            chunks.push(Vec::new());
            let reports = (!spec.theory_variant).then_some(w);
            roles.push(Arc::new(RecallManager { reports }));
            Ok(Layout { spec: *spec, width: w + 1, manager, chunks, roles, horizon: w + 6 })
        }
        (Family::PrefixSum | Family::ChainOfAgents, TaskInstance::StateTracking(s)) => {
            let n = s.len();
            if w > n {
                return Err(invalid(format!("width {w} exceeds input length {n}")));
            }
            if spec.family == Family::PrefixSum && spec.branching < 2 {
                return Err(invalid(format!("branching factor {} below 2", spec.branching)));
            }
            let symbols = s.symbols();
            let ranges = partition(n, w);
            let lengths: Vec<usize> = ranges.iter().map(|r| r.len()).collect();
            let chunks: Vec<Vec<Symbol>> = ranges.into_iter().map(|r| symbols[r].to_vec()).collect();
            let steps = if spec.family == Family::PrefixSum {
                prefix_sum_steps(&lengths, spec.branching)
            } else {
                chain_steps(&lengths)
            };
            Ok(state_layout(spec, s.monoid(), chunks, steps, w))
        }
        (Family::MajorityVote, inst) => {
            let m = spec.replicas;
            if m == 0 {
                return Err(invalid("majority vote needs at least one replica".into()));
            }
            let manager = m + 1;
            let mut roles: Vec<Arc<dyn Role>> = Vec::with_capacity(m + 1);
            let (chunk, t0) = match inst {
                TaskInstance::Recall(r) => {
                    let mut chunk = recall_tokens(r.pairs());
                    chunk.push(recall_query_token(r.query()));
                    for j in 1..=m {
                        roles.push(Arc::new(RecallSolo { tail: Tail::Replica { index: j, manager } }));
                    }
                    (chunk, 2)
                }
                TaskInstance::StateTracking(s) => {
                    if s.is_empty() {
                        return Err(invalid("empty word".into()));
                    }
                    for j in 1..=m {
                        let steps = solo_fold_steps(s.len(), Tail::Replica { index: j, manager });
                        roles.push(Arc::new(StateRole { kind: RoleKind::Solo, monoid: s.monoid().clone(), steps }));
                    }
                    (s.symbols(), s.len())
                }
                TaskInstance::KHop(h) => {
                    let mut chunk: Vec<Symbol> = h.facts().iter().map(fact_token).collect();
                    chunk.push(query_token(h.chain(), h.start()));
                    for j in 1..=m {
                        roles.push(Arc::new(KHopSolo { tail: Tail::Replica { index: j, manager } }));
                    }
                    (chunk, h.k() + 1)
                }
            };
            if chunk.len() < 2 {
                return Err(invalid(format!("{m} replicas plus a manager exceed the input length")));
            }
            roles.push(Arc::new(VoteManager { t0, replicas: m }));
            let mut chunks = vec![chunk; m];
            chunks.push(Vec::new());
            Ok(Layout { spec: *spec, width: m + 1, manager, chunks, roles, horizon: t0 + m + 4 })
        }
        (Family::IterativeQuery, TaskInstance::KHop(h)) => {
            let facts: Vec<Symbol> = h.facts().iter().map(fact_token).collect();
            let query = query_token(h.chain(), h.start());
            let k = h.k();
            if w > facts.len() + 1 {
                return Err(invalid(format!("width {w} exceeds input length {}", facts.len() + 1)));
            }
            if w == 1 {
                let mut chunk = facts;
                chunk.push(query);
                let role: Arc<dyn Role> = Arc::new(KHopSolo { tail: Tail::Done });
                return Ok(Layout { spec: *spec, width: 1, manager: 1, chunks: vec![chunk], roles: vec![role], horizon: k + 4 });
            }
            let mut chunks: Vec<Vec<Symbol>> =
                partition(facts.len(), w - 1).into_iter().map(|r| facts[r].to_vec()).collect();
            chunks.push(vec![query]);
            let mut roles: Vec<Arc<dyn Role>> = Vec::with_capacity(w);
            for _ in 1..w {
                roles.push(Arc::new(KHopWorker { manager: w }));
            }
            roles.push(Arc::new(KHopManager));
            Ok(Layout { spec: *spec, width: w, manager: w, chunks, roles, horizon: 2 * k + 6 })
        }
        (_, inst) => Err(incompatible(spec, inst.kind().map(|k| k.as_str()).unwrap_or("custom"))),
    }
}

fn state_layout(
    spec: &ProtocolSpec,
    monoid: &Arc<Monoid>,
    chunks: Vec<Vec<Symbol>>,
    steps: Vec<Vec<Step>>,
    w: usize,
) -> Layout {
    let horizon = steps.iter().map(Vec::len).max().unwrap_or(0) + 4;
    let roles: Vec<Arc<dyn Role>> = steps
        .into_iter()
        .enumerate()
        .map(|(i, steps)| {
            let kind = if w == 1 {
                RoleKind::Solo
            } else if i + 1 == w {
                RoleKind::Manager
            } else {
                RoleKind::Worker
            };
            Arc::new(StateRole { kind, monoid: monoid.clone(), steps }) as Arc<dyn Role>
        })
        .collect();
    Layout { spec: *spec, width: w, manager: w, chunks, roles, horizon }
}

/// Phase one: fold the chunk with one CoT step per element after the first,
/// then spin until every agent holds its fold at step `ceil(N/w)`.
fn phase_one(lengths: &[usize]) -> (Vec<Vec<Step>>, usize) {
    let top = lengths.iter().copied().max().unwrap_or(1);
    let steps = lengths
        .iter()
        .map(|&l| {
            let mut s: Vec<Step> = (1..l).map(|t| Step::Fold { next: t, last: t + 1 == l }).collect();
            s.resize(top - 1, Step::Spin);
            s
        })
        .collect();
    (steps, top)
}

/// Tree reduction in groups of `b` consecutive survivors, rooted at the
/// highest index. Children send one per step; the root receives serially and
/// composes once, and every group realigns before the next round.
pub(crate) fn prefix_sum_steps(lengths: &[usize], b: usize) -> Vec<Vec<Step>> {
    let (mut steps, top) = phase_one(lengths);
    let w = lengths.len();
    if w == 1 {
        steps[0].push(Step::Spin);
        return steps;
    }
    let mut survivors: Vec<usize> = (1..=w).collect();
    let mut t = top;
    while survivors.len() > 1 {
        let groups: Vec<Vec<usize>> = survivors.chunks(b).map(<[usize]>::to_vec).collect();
        let g = groups.iter().map(Vec::len).max().unwrap_or(1);
        for group in &groups {
            let root = *group.last().unwrap();
            let children = &group[..group.len() - 1];
            for (j, &child) in children.iter().enumerate() {
                let s = &mut steps[child - 1];
                s.extend(std::iter::repeat_n(Step::Spin, j));
                s.push(Step::SendState { to: root });
            }
            let s = &mut steps[root - 1];
            let c = children.len();
            if c > 0 {
                s.extend(std::iter::repeat_n(Step::Idle, c));
                s.push(Step::Compose { receipts: c, then: Then::Emit });
            }
            // Spin until the next round starts at t + g.
            if survivors.len() > b {
                let pad = t + g - 1 - s.len();
                s.extend(std::iter::repeat_n(Step::Spin, pad));
            }
        }
        survivors = groups.iter().map(|gr| *gr.last().unwrap()).collect();
        t += g;
    }
    steps
}

/// Chain of agents: agent `i` receives the running state at `L + i - 1`,
/// composes it with its own fold and passes it on; the last agent answers.
pub(crate) fn chain_steps(lengths: &[usize]) -> Vec<Vec<Step>> {
    let (mut steps, _) = phase_one(lengths);
    let w = lengths.len();
    if w == 1 {
        steps[0].push(Step::Spin);
        return steps;
    }
    steps[0].push(Step::SendState { to: 2 });
    for i in 2..=w {
        let s = &mut steps[i - 1];
        s.extend(std::iter::repeat_n(Step::Spin, i - 2));
        s.push(Step::Idle);
        let then = if i == w { Then::Emit } else { Then::Send { target: i + 1 } };
        s.push(Step::Compose { receipts: 1, then });
    }
    steps
}
