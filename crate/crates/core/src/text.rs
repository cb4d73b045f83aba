//! Line-oriented DAG format.
//!
//! ```text
//! width 4 manager 4
//! agent 1 nodes 2 chunk 1 1
//! 1 1 -> 1 2 cot 0
//! 1 2 -> 2 3 comm 0
//! ```
//!
//! One `agent` line per agent (node count and input chunk), then one line per
//! edge in stored order. Symbols must be non-empty and free of whitespace.

use std::fmt::Write as _;

use thiserror::Error;

use crate::{Edge, EdgeKind, ExecutionDag, NodeId, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextError {
    #[error("symbol {0:?} cannot be written (empty or contains whitespace)")]
    UnwritableSymbol(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

fn check(s: &Symbol) -> Result<&str, TextError> {
    let raw = s.as_str();
    if raw.is_empty() || raw.chars().any(char::is_whitespace) {
        return Err(TextError::UnwritableSymbol(raw.to_string()));
    }
    Ok(raw)
}

pub fn to_text(dag: &ExecutionDag) -> Result<String, TextError> {
    let mut out = String::new();
    writeln!(out, "width {} manager {}", dag.width(), dag.manager()).unwrap();
    for agent in 1..=dag.width() {
        write!(out, "agent {agent} nodes {} chunk", dag.length(agent)).unwrap();
        for s in dag.chunk(agent) {
            write!(out, " {}", check(s)?).unwrap();
        }
        out.push('\n');
    }
    for e in dag.edges() {
        let kind = match e.kind {
            EdgeKind::Cot => "cot",
            EdgeKind::Communication => "comm",
        };
        writeln!(
            out,
            "{} {} -> {} {} {kind} {}",
            e.from.agent,
            e.from.time,
            e.to.agent,
            e.to.time,
            check(&e.symbol)?
        )
        .unwrap();
    }
    Ok(out)
}

pub fn from_text(text: &str) -> Result<ExecutionDag, TextError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let err = |line: usize, reason: &str| TextError::Parse { line: line + 1, reason: reason.to_string() };
    let num = |line: usize, s: &str| s.parse::<usize>().map_err(|_| err(line, &format!("expected a number, got {s:?}")));

    let (ln, header) = lines.next().ok_or_else(|| err(0, "empty input"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 || h[0] != "width" || h[2] != "manager" {
        return Err(err(ln, "expected `width <w> manager <m>`"));
    }
    let width = num(ln, h[1])?;
    let manager = num(ln, h[3])?;

    let mut lengths = vec![0; width];
    let mut chunks = vec![Vec::new(); width];
    let mut seen = vec![false; width];
    let mut edges = Vec::new();
    for (ln, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f[0] == "agent" {
            if f.len() < 5 || f[2] != "nodes" || f[4] != "chunk" {
                return Err(err(ln, "expected `agent <i> nodes <D> chunk <symbols...>`"));
            }
            let agent = num(ln, f[1])?;
            if agent == 0 || agent > width || seen[agent - 1] {
                return Err(err(ln, "agent index out of range or repeated"));
            }
            seen[agent - 1] = true;
            lengths[agent - 1] = num(ln, f[3])?;
            chunks[agent - 1] = f[5..].iter().map(|s| Symbol::new(*s)).collect();
        } else {
            if f.len() != 7 || f[2] != "->" {
                return Err(err(ln, "expected `<from_agent> <from_time> -> <to_agent> <to_time> <kind> <symbol>`"));
            }
            let kind = match f[5] {
                "cot" => EdgeKind::Cot,
                "comm" => EdgeKind::Communication,
                other => return Err(err(ln, &format!("unknown edge kind {other:?}"))),
            };
            edges.push(Edge {
                from: NodeId::new(num(ln, f[0])?, num(ln, f[1])?),
                to: NodeId::new(num(ln, f[3])?, num(ln, f[4])?),
                kind,
                symbol: Symbol::new(f[6]),
            });
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(err(ln, &format!("missing `agent {}` line", i + 1)));
    }
    ExecutionDag::new(width, manager, lengths, edges, chunks).map_err(|e| err(ln, &e.to_string()))
}
