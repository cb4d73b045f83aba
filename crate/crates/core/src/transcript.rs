use std::collections::BTreeMap;

use thiserror::Error;

use crate::dag::Adjacency;
use crate::{DagError, Edge, EdgeKind, ExecutionDag, NodeId, Token};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranscriptError {
    #[error("unknown agent {agent} (width {width})")]
    UnknownAgent { agent: usize, width: usize },
    #[error("transcript of agent {agent} is malformed: {reason}")]
    Malformed { agent: usize, reason: String },
    #[error(transparent)]
    Dag(#[from] DagError),
}

/// The token sequence processed by one agent: its chunk, its ID token, then per
/// node (receive, CoT emission, send/broadcast), ending in EOS.
///
/// With two agents a broadcast reaches one agent and is recorded as a send.
pub fn transcript(dag: &ExecutionDag, agent: usize) -> Result<Vec<Token>, TranscriptError> {
    if agent == 0 || agent > dag.width() {
        return Err(TranscriptError::UnknownAgent { agent, width: dag.width() });
    }
    let adj = dag.adjacency();
    let mut tokens: Vec<Token> = dag.chunk(agent).iter().cloned().map(Token::Plain).collect();
    tokens.push(Token::AgentId(agent));
    for t in 1..=dag.length(agent) {
        node_tokens(dag, &adj, NodeId::new(agent, t), &mut tokens);
    }
    tokens.push(Token::Eos);
    Ok(tokens)
}

fn node_tokens(dag: &ExecutionDag, adj: &Adjacency, node: NodeId, tokens: &mut Vec<Token>) {
    let edges = dag.edges();
    for &k in adj.incoming(node) {
        if edges[k].is_comm() {
            tokens.push(Token::Receive(edges[k].symbol.clone()));
        }
    }
    for &k in adj.outgoing(node) {
        if edges[k].is_cot() {
            tokens.push(Token::Plain(edges[k].symbol.clone()));
        }
    }
    let comms: Vec<&Edge> = adj.outgoing(node).iter().map(|&k| &edges[k]).filter(|e| e.is_comm()).collect();
    match comms.as_slice() {
        [] => {}
        [e] => tokens.push(Token::Send { symbol: e.symbol.clone(), target: e.to.agent }),
        [e, ..] if comms.len() == dag.width() - 1 => tokens.push(Token::Broadcast(e.symbol.clone())),
        many => {
            for e in many {
                tokens.push(Token::Send { symbol: e.symbol.clone(), target: e.to.agent });
            }
        }
    }
}

/// Rebuilds a DAG from every agent's transcript plus the communication edges.
///
/// Chunks come from the tokens before each ID token, CoT edges from the plain
/// tokens in order, and node counts from where each transcript ends.
pub fn reconstruct(
    manager: usize,
    transcripts: &[Vec<Token>],
    comm_edges: &[Edge],
) -> Result<ExecutionDag, TranscriptError> {
    let width = transcripts.len();
    let mut receipts: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in comm_edges {
        receipts.entry(e.to.agent).or_default().push(e.to.time);
    }
    for times in receipts.values_mut() {
        times.sort_unstable();
    }

    let mut lengths = Vec::with_capacity(width);
    let mut chunks = Vec::with_capacity(width);
    let mut edges: Vec<Edge> = Vec::new();
    for (i, tokens) in transcripts.iter().enumerate() {
        let agent = i + 1;
        let bad = |reason: &str| TranscriptError::Malformed { agent, reason: reason.to_string() };
        let id_pos = tokens
            .iter()
            .position(|t| matches!(t, Token::AgentId(_)))
            .ok_or_else(|| bad("missing ID token"))?;
        if tokens[id_pos] != Token::AgentId(agent) {
            return Err(bad("ID token names another agent"));
        }
        let mut chunk = Vec::with_capacity(id_pos);
        for t in &tokens[..id_pos] {
            match t {
                Token::Plain(s) => chunk.push(s.clone()),
                _ => return Err(bad("non-plain token inside the input chunk")),
            }
        }
        chunks.push(chunk);

        let mut pending = receipts.get(&agent).map(|v| v.iter().copied()).into_iter().flatten();
        let mut time = 1;
        let mut emitted_here = false;
        let mut ended = false;
        for t in &tokens[id_pos + 1..] {
            if ended {
                return Err(bad("tokens after EOS"));
            }
            match t {
                Token::Receive(_) => {
                    let at = pending.next().ok_or_else(|| bad("RECEIVE without a matching communication edge"))?;
                    let floor = if emitted_here { time + 1 } else { time };
                    if at < floor.max(2) {
                        return Err(bad("RECEIVE out of order"));
                    }
                    time = at;
                    emitted_here = false;
                }
                Token::Plain(s) => {
                    if emitted_here {
                        time += 1;
                    }
                    edges.push(Edge::cot(agent, time, s.clone()));
                    emitted_here = true;
                }
                Token::Send { .. } | Token::Broadcast(_) => {}
                Token::Eos => ended = true,
                Token::AgentId(_) => return Err(bad("second ID token")),
            }
        }
        if !ended {
            return Err(bad("missing EOS"));
        }
        if pending.next().is_some() {
            return Err(bad("communication edge without a RECEIVE token"));
        }
        lengths.push(if emitted_here { time + 1 } else { time });
    }
    edges.extend(comm_edges.iter().cloned());
    edges.sort_by_key(|e| (e.from.time, e.from.agent, e.kind == EdgeKind::Communication, e.to.agent));
    Ok(ExecutionDag::new(width, manager, lengths, edges, chunks)?)
}
