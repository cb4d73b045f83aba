use masim_core::Symbol;
use masim_protocols::Duty;
use masim_tasks::render::{
    bits_text, chain_question, facts_text, hop_question, perm_dict, recall_text, reports_text,
};
use masim_tasks::parse_subquery_token;
use serde::{Deserialize, Serialize};

use crate::{AnswerKind, BridgeError, TemplateId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Message { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Message { role: Role::User, content: content.into() }
    }
}

const IDENTITY: &str = "12345";

fn incompatible(template: TemplateId, duty: &Duty) -> BridgeError {
    BridgeError::Incompatible { template, duty: duty.name() }
}

fn empty(template: TemplateId) -> BridgeError {
    BridgeError::EmptyInput(template)
}

fn is_bit(s: &Symbol) -> bool {
    s == "0" || s == "1"
}

fn bits(template: TemplateId, duty: &Duty, xs: &[Symbol]) -> Result<String, BridgeError> {
    if xs.is_empty() {
        return Err(empty(template));
    }
    if !xs.iter().all(is_bit) {
        return Err(incompatible(template, duty));
    }
    Ok(bits_text(xs))
}

fn perms(template: TemplateId, duty: &Duty, xs: &[Symbol]) -> Result<(), BridgeError> {
    if xs.is_empty() {
        return Err(empty(template));
    }
    if xs.iter().any(|x| perm_dict(x).is_none()) {
        return Err(incompatible(template, duty));
    }
    Ok(())
}

/// Swaps that carry the identity to `element` when applied in order, each
/// exchanging the bins of two balls. At most four.
pub fn swap_sequence(element: &Symbol) -> Option<Vec<(usize, usize)>> {
    perm_dict(element)?;
    let target: Vec<char> = element.as_str().chars().collect();
    let mut bins: Vec<char> = IDENTITY.chars().collect();
    let mut out = Vec::new();
    for i in 0..5 {
        if bins[i] != target[i] {
            let j = (i + 1..5).find(|&j| bins[j] == target[i])?;
            bins.swap(i, j);
            out.push((i + 1, j + 1));
        }
    }
    Some(out)
}

/// One `Swap ball X and ball Y` line per swap, every element expanded.
fn swap_lines(elements: &[Symbol]) -> String {
    let lines: Vec<String> = elements
        .iter()
        .flat_map(|e| swap_sequence(e).expect("validated permutation"))
        .map(|(x, y)| format!("Swap ball {x} and ball {y}"))
        .collect();
    if lines.is_empty() {
        "(none)".to_string()
    } else {
        lines.join("\n")
    }
}

/// The `Current positions` plus swap list a perm worker sees.
fn perm_worker_text(state: &Symbol, ops: &[Symbol]) -> String {
    format!("Current positions: {}\nSwap operations:\n{}", perm_dict(state).expect("validated permutation"), swap_lines(ops))
}

/// User-message text for a duty under a template.
///
/// Fails when the template cannot express the duty or when the duty carries
/// no input; a prompt is never truncated.
pub fn render_user(template: TemplateId, duty: &Duty) -> Result<String, BridgeError> {
    use TemplateId as T;
    match (template, duty) {
        (T::RecallWorker | T::RecallMajority, Duty::Lookup { pairs, query }) => {
            if pairs.is_empty() {
                return Err(empty(template));
            }
            Ok(recall_text(pairs, query))
        }
        (T::RecallManager, Duty::Select { reports }) => {
            if reports.is_empty() {
                return Err(empty(template));
            }
            Ok(reports_text(reports))
        }
        (T::ParityWorker | T::ParityMajority, Duty::Fold { elements }) => bits(template, duty, elements),
        (T::ParityManager | T::PrefixManager, Duty::Combine { parts }) => bits(template, duty, parts),
        (T::PermMajority, Duty::Fold { elements }) => {
            perms(template, duty, elements)?;
            Ok(swap_lines(elements))
        }
        (T::PermWorker, Duty::Fold { elements }) => {
            perms(template, duty, elements)?;
            Ok(perm_worker_text(&Symbol::new(IDENTITY), elements))
        }
        (T::PermWorker | T::PermPrefixWorker, Duty::Combine { parts }) => {
            perms(template, duty, parts)?;
            if parts.len() < 2 {
                return Err(empty(template));
            }
            Ok(perm_worker_text(&parts[0], &parts[1..]))
        }
        (T::PermManager | T::PermPrefixManager, Duty::Combine { parts }) => {
            perms(template, duty, parts)?;
            let lines: Vec<String> = parts
                .iter()
                .enumerate()
                .map(|(i, p)| format!("Worker {}: {}", i + 1, perm_dict(p).expect("validated permutation")))
                .collect();
            Ok(lines.join("\n"))
        }
        (T::KhopWorker, Duty::Resolve { facts, relation, argument }) => {
            if facts.is_empty() {
                return Err(empty(template));
            }
            Ok(format!("Facts: \"{}\"\nQuery: \"{}\"", facts_text(facts), hop_question(relation, argument)))
        }
        (T::KhopMajority, Duty::Answer { facts, chain, start }) => {
            if facts.is_empty() || chain.is_empty() {
                return Err(empty(template));
            }
            Ok(format!("Facts: \"{}\"\nQuery: \"{}\"", facts_text(facts), chain_question(chain, start)))
        }
        (T::KhopManager, Duty::NextQuery { chain, start, answer, step }) => {
            if chain.is_empty() || *step == 0 || *step >= chain.len() {
                return Err(empty(template));
            }
            Ok(format!(
                "Original question: \"{}\"\nCurrent answer: \"{answer}\"\nCurrent step: {step}",
                chain_question(chain, start)
            ))
        }
        _ => Err(incompatible(template, duty)),
    }
}

/// System message with the verbatim prompt, then the rendered task.
pub fn render_prompt(template: TemplateId, duty: &Duty) -> Result<Vec<Message>, BridgeError> {
    let user = render_user(template, duty)?;
    Ok(vec![Message::system(template.system_prompt()), Message::user(user)])
}

/// A minimal well-formed reply carrying `answer`; [`crate::parse_answer`]
/// inverts it.
pub fn render_response(template: TemplateId, answer: &Symbol) -> Result<String, BridgeError> {
    let marker = template.marker().text();
    let bad = || BridgeError::Unrenderable { template, answer: answer.to_string() };
    let body = match template.answer_kind() {
        AnswerKind::Value => answer.to_string(),
        AnswerKind::Bit if is_bit(answer) => answer.to_string(),
        AnswerKind::Bit => return Err(bad()),
        AnswerKind::Permutation => perm_dict(answer).ok_or_else(bad)?,
        AnswerKind::Entity if answer.is_not_found() => "Not Found".to_string(),
        AnswerKind::Entity => answer.to_string(),
        AnswerKind::Question => {
            let (relation, argument) = parse_subquery_token(answer).ok_or_else(bad)?;
            hop_question(&relation, &argument)
        }
    };
    Ok(format!("{marker} {body}"))
}
