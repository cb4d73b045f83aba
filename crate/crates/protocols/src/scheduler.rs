use masim_agents::{Action, Agent, AgentContext};
use masim_core::{Edge, ExecutionDag, Symbol, Token};

use crate::{Layout, ProtocolError, RunFailure};

/// A finished (or aborted) execution: the DAG built so far and, for aborted
/// runs, why it stopped.
pub struct Execution {
    pub dag: ExecutionDag,
    pub failure: Option<RunFailure>,
    /// Final transcript prefix of every agent, without the closing EOS.
    pub contexts: Vec<AgentContext>,
}

/// Runs agents in synchronous steps. At step `t` every agent owning node
/// `t` acts; actions are committed in ascending agent order. A node exists at
/// `t + 1` exactly when one edge enters it.
pub fn execute(layout: &Layout, mut agents: Vec<Box<dyn Agent>>) -> Result<Execution, ProtocolError> {
    let w = layout.width;
    assert_eq!(agents.len(), w, "one agent per DAG row");
    let mut contexts: Vec<AgentContext> =
        (1..=w).map(|i| AgentContext::new(&layout.chunks[i - 1], i, w)).collect();
    let mut alive = vec![true; w];
    let mut lengths = vec![1usize; w];
    let mut edges: Vec<Edge> = Vec::new();
    let mut failure = None;
    let mut t = 1;

    while alive.iter().any(|&a| a) {
        if t > layout.horizon {
            failure = Some(RunFailure::StepLimit { horizon: layout.horizon });
            break;
        }
        let mut actions: Vec<Option<Action>> = vec![None; w];
        for i in 0..w {
            if alive[i] {
                match agents[i].step(&contexts[i]) {
                    Ok(a) => actions[i] = Some(a),
                    Err(e) => {
                        failure = Some(RunFailure::Agent(e));
                        break;
                    }
                }
            }
        }
        if failure.is_some() {
            break;
        }

        let mut incoming = vec![0usize; w];
        let mut inbox: Vec<Option<Symbol>> = vec![None; w];
        let mut step_edges = Vec::new();
        for (i, action) in actions.iter().enumerate() {
            let Some(action) = action else { continue };
            let from = i + 1;
            let mut tokens = Vec::new();
            if let Some(c) = action.cot() {
                tokens.push(Token::Plain(c.clone()));
                step_edges.push(Edge::cot(from, t, c.clone()));
                incoming[i] += 1;
            }
            let targets: Vec<usize> = match action {
                Action::Send { target, .. } => vec![*target],
                Action::Broadcast { .. } => (1..=w).filter(|&j| j != from).collect(),
                _ => Vec::new(),
            };
            if matches!(action, Action::Broadcast { .. }) && targets.is_empty() {
                return Err(ProtocolError::InvalidTarget { from, to: from, time: t });
            }
            let symbol = action.symbol().cloned();
            for &to in &targets {
                if to == 0 || to > w || to == from {
                    return Err(ProtocolError::InvalidTarget { from, to, time: t });
                }
                if !alive[to - 1] {
                    return Err(ProtocolError::DeadRecipient { from, to, time: t });
                }
                let s = symbol.clone().expect("send carries a symbol");
                step_edges.push(Edge::comm(from, t, to, s.clone()));
                incoming[to - 1] += 1;
                inbox[to - 1] = Some(s);
            }
            match action {
                Action::Send { symbol, target, .. } => {
                    tokens.push(Token::Send { symbol: symbol.clone(), target: *target })
                }
                Action::Broadcast { symbol, .. } if w == 2 => {
                    tokens.push(Token::Send { symbol: symbol.clone(), target: targets[0] })
                }
                Action::Broadcast { symbol, .. } => tokens.push(Token::Broadcast(symbol.clone())),
                _ => {}
            }
            contexts[i].record(tokens);
        }
        if let Some(j) = incoming.iter().position(|&c| c > 1) {
            return Err(ProtocolError::InboxCollision { agent: j + 1, time: t + 1 });
        }
        edges.extend(step_edges);
        for i in 0..w {
            alive[i] = incoming[i] == 1;
            if alive[i] {
                lengths[i] = t + 1;
                contexts[i].advance(inbox[i].take());
            }
        }
        t += 1;
    }

    let dag = ExecutionDag::new(w, layout.manager, lengths, edges, layout.chunks.clone())?;
    Ok(Execution { dag, failure, contexts })
}
