use masim_core::Symbol;
use masim_tasks::render::{parse_hop_question, parse_perm_dict};
use masim_tasks::subquery_token;

use crate::{AnswerKind, TemplateId};

const PUNCT: &[char] = &['.', ',', ';', ':', '!', '"', '\'', '`', '*', '[', ']', '(', ')', '<', '>'];

fn is_not_found(s: &str) -> bool {
    let s: String = s.chars().filter(|c| c.is_alphanumeric()).collect();
    s.eq_ignore_ascii_case("notfound")
}

/// Text after the final occurrence of `marker`, up to the end of that line.
pub fn after_marker<'a>(text: &'a str, marker: &str) -> Option<&'a str> {
    let at = text.rfind(marker)?;
    let rest = &text[at + marker.len()..];
    Some(rest.split('\n').next().unwrap_or("").trim())
}

/// Reads the answer a template asks the model to state.
///
/// Takes the final occurrence of the template's marker and normalizes what
/// follows it. `Err` carries a reason when the marker is absent or the answer
/// has the wrong shape.
pub fn parse_answer(text: &str, template: TemplateId) -> Result<Symbol, String> {
    let marker = template.marker().text();
    let rest = after_marker(text, marker).ok_or_else(|| format!("no {marker:?} in reply"))?;
    let trimmed = rest.trim_matches(|c: char| c.is_whitespace() || PUNCT.contains(&c));
    match template.answer_kind() {
        AnswerKind::Value | AnswerKind::Entity => {
            if is_not_found(trimmed) {
                return Ok(Symbol::not_found());
            }
            let token = trimmed
                .split_whitespace()
                .next()
                .map(|t| t.trim_matches(|c: char| PUNCT.contains(&c)))
                .filter(|t| !t.is_empty())
                .ok_or_else(|| format!("empty answer after {marker:?}"))?;
            Ok(Symbol::new(token))
        }
        AnswerKind::Bit => match trimmed.split_whitespace().next() {
            Some(b @ ("0" | "1")) => Ok(Symbol::new(b)),
            _ => Err(format!("expected a bit after {marker:?}, got {rest:?}")),
        },
        AnswerKind::Permutation => {
            let open = rest.find('{').ok_or_else(|| format!("no dictionary after {marker:?}"))?;
            let close = rest[open..].find('}').ok_or_else(|| "unterminated dictionary".to_string())? + open;
            parse_perm_dict(&rest[open..=close]).ok_or_else(|| format!("not a permutation: {}", &rest[open..=close]))
        }
        AnswerKind::Question => {
            let (relation, argument) =
                parse_hop_question(rest).ok_or_else(|| format!("not a single-hop question: {rest:?}"))?;
            Ok(subquery_token(&relation, &argument))
        }
    }
}
