//! Text records for task instances, one item per line after a header.
//!
//! ```text
//! task recall seed 7
//! pair 4 C
//! query 4
//! ```
//!
//! State-tracking records name the monoid (`parity` or `s5`) and list one
//! `element` per line; k-hop records list `entity`, `relation`, `fact`
//! (`fact <relation> <argument> <result>`) lines plus `chain` and `start`.

use std::fmt::Write as _;

use masim_core::Symbol;

use crate::{Fact, KHopInstance, Monoid, RecallInstance, StateTrackingInstance, TaskError, TaskInstance};

pub fn write_instance(inst: &TaskInstance, seed: Option<u64>) -> Result<String, TaskError> {
    let mut out = String::new();
    let seed_part = seed.map(|s| format!(" seed {s}")).unwrap_or_default();
    match inst {
        TaskInstance::Recall(r) => {
            writeln!(out, "task recall n {}{seed_part}", r.n()).unwrap();
            for (k, v) in r.pairs() {
                writeln!(out, "pair {k} {v}").unwrap();
            }
            writeln!(out, "query {}", r.query()).unwrap();
        }
        TaskInstance::StateTracking(s) => {
            let name = s.monoid().name();
            if name != "parity" && name != "s5" {
                return Err(TaskError::InvalidInstance(format!("monoid {name:?} has no record form")));
            }
            writeln!(out, "task state monoid {name} n {}{seed_part}", s.len()).unwrap();
            for e in s.symbols() {
                writeln!(out, "element {e}").unwrap();
            }
        }
        TaskInstance::KHop(h) => {
            writeln!(out, "task khop n {} k {}{seed_part}", h.facts().len(), h.k()).unwrap();
            for e in h.entities() {
                writeln!(out, "entity {e}").unwrap();
            }
            for r in h.relations() {
                writeln!(out, "relation {r}").unwrap();
            }
            for f in h.facts() {
                writeln!(out, "fact {} {} {}", f.relation, f.argument, f.result).unwrap();
            }
            let chain: Vec<&str> = h.chain().iter().map(Symbol::as_str).collect();
            writeln!(out, "chain {}", chain.join(" ")).unwrap();
            writeln!(out, "start {}", h.start()).unwrap();
        }
    }
    Ok(out)
}

pub fn read_instance(text: &str) -> Result<(TaskInstance, Option<u64>), TaskError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let err = |line: usize, reason: String| TaskError::Record { line: line + 1, reason };
    let (hl, header) = lines.next().ok_or_else(|| err(0, "empty record".into()))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.first() != Some(&"task") || h.len() < 2 {
        return Err(err(hl, "expected `task <family> ...` header".into()));
    }
    let field = |name: &str| h.windows(2).find(|w| w[0] == name).map(|w| w[1]);
    let seed = match field("seed") {
        Some(s) => Some(s.parse::<u64>().map_err(|_| err(hl, format!("bad seed {s:?}")))?),
        None => None,
    };
    let body: Vec<(usize, Vec<&str>)> = lines.map(|(n, l)| (n, l.split_whitespace().collect())).collect();
    let wrong = |n: usize, f: &[&str]| err(n, format!("unexpected line {:?}", f.join(" ")));

    let inst = match h[1] {
        "recall" => {
            let mut pairs = Vec::new();
            let mut query = None;
            for (n, f) in &body {
                match f.as_slice() {
                    ["pair", k, v] => pairs.push((Symbol::new(*k), Symbol::new(*v))),
                    ["query", q] => query = Some(Symbol::new(*q)),
                    _ => return Err(wrong(*n, f)),
                }
            }
            let query = query.ok_or_else(|| err(hl, "missing query line".into()))?;
            TaskInstance::Recall(RecallInstance::new(pairs, query)?)
        }
        "state" => {
            let monoid = match field("monoid") {
                Some("parity") => Monoid::shared_parity(),
                Some("s5") => Monoid::shared_s5(),
                other => return Err(err(hl, format!("unknown monoid {other:?}"))),
            };
            let mut names = Vec::new();
            for (n, f) in &body {
                match f.as_slice() {
                    ["element", e] => names.push(*e),
                    _ => return Err(wrong(*n, f)),
                }
            }
            TaskInstance::StateTracking(StateTrackingInstance::from_names(monoid, names)?)
        }
        "khop" => {
            let (mut entities, mut relations, mut facts) = (Vec::new(), Vec::new(), Vec::new());
            let (mut chain, mut start) = (Vec::new(), None);
            for (n, f) in &body {
                match f.as_slice() {
                    ["entity", e] => entities.push(Symbol::new(*e)),
                    ["relation", r] => relations.push(Symbol::new(*r)),
                    ["fact", r, a, b] => facts.push(Fact::new(*r, *a, *b)),
                    ["chain", rest @ ..] => chain = rest.iter().map(|s| Symbol::new(*s)).collect(),
                    ["start", s] => start = Some(Symbol::new(*s)),
                    _ => return Err(wrong(*n, f)),
                }
            }
            let start = start.ok_or_else(|| err(hl, "missing start line".into()))?;
            TaskInstance::KHop(KHopInstance::new(entities, relations, facts, chain, start)?)
        }
        other => return Err(err(hl, format!("unknown task family {other:?}"))),
    };
    Ok((inst, seed))
}
