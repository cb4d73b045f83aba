//! Natural-language renderings for prompting language models.
//!
//! These are one-way: the simulator works on symbols and never parses prose.
//! The few inverse functions here exist for reading model replies.

use masim_core::Symbol;

use crate::Fact;

/// `"23 42 12 34 | Query: 56"`: keys and values in order, then the query.
pub fn recall_text(pairs: &[(Symbol, Symbol)], query: &Symbol) -> String {
    let mut parts: Vec<&str> = Vec::with_capacity(2 * pairs.len());
    for (k, v) in pairs {
        parts.push(k.as_str());
        parts.push(v.as_str());
    }
    format!("{} | Query: {query}", parts.join(" "))
}

/// `"NOT_FOUND NOT_FOUND 78 NOT_FOUND"`.
pub fn reports_text(reports: &[Symbol]) -> String {
    reports.iter().map(Symbol::as_str).collect::<Vec<_>>().join(" ")
}

/// `"1011"`.
pub fn bits_text(bits: &[Symbol]) -> String {
    bits.iter().map(Symbol::as_str).collect()
}

/// Ball-to-bin dictionary for an S5 element in one-line notation,
/// `"{1:2, 2:1, 3:3, 4:4, 5:5}"`.
pub fn perm_dict(element: &Symbol) -> Option<String> {
    let digits: Vec<char> = element.as_str().chars().collect();
    if digits.len() != 5 || !digits.iter().all(|c| ('1'..='5').contains(c)) {
        return None;
    }
    let body: Vec<String> = digits.iter().enumerate().map(|(i, d)| format!("{}:{d}", i + 1)).collect();
    Some(format!("{{{}}}", body.join(", ")))
}

/// Reads a `{ball:bin, ...}` dictionary back into one-line notation. Balls that
/// are not mentioned stay in their own bin. `None` unless the result is a
/// permutation of 1..5.
pub fn parse_perm_dict(text: &str) -> Option<Symbol> {
    let inner = text.trim().strip_prefix('{')?.strip_suffix('}')?;
    let mut bins: Vec<u32> = (1..=5).collect();
    for entry in inner.split(',').map(str::trim).filter(|e| !e.is_empty()) {
        let (ball, bin) = entry.split_once(':')?;
        let ball: u32 = ball.trim().parse().ok()?;
        let bin: u32 = bin.trim().parse().ok()?;
        if !(1..=5).contains(&ball) || !(1..=5).contains(&bin) {
            return None;
        }
        bins[(ball - 1) as usize] = bin;
    }
    let mut seen = bins.clone();
    seen.sort_unstable();
    if seen != [1, 2, 3, 4, 5] {
        return None;
    }
    Some(Symbol::new(bins.iter().map(|b| char::from_digit(*b, 10).unwrap()).collect::<String>()))
}

/// `"Swap ball X and ball Y"` when the element is a transposition.
pub fn swap_text(element: &Symbol) -> Option<String> {
    let moved: Vec<usize> = element
        .as_str()
        .chars()
        .enumerate()
        .filter(|(i, c)| c.to_digit(10) != Some(*i as u32 + 1))
        .map(|(i, _)| i + 1)
        .collect();
    match moved.as_slice() {
        [x, y] if element.as_str().len() == 5 => Some(format!("Swap ball {x} and ball {y}")),
        _ => None,
    }
}

/// One line per element: swap commands for transpositions, dictionaries otherwise.
pub fn swaps_text(elements: &[Symbol]) -> String {
    elements
        .iter()
        .map(|e| swap_text(e).or_else(|| perm_dict(e)).unwrap_or_else(|| e.to_string()))
        .collect::<Vec<_>>()
        .join("\n")
}

/// `"b's boss is a."`
pub fn fact_sentence(f: &Fact) -> String {
    format!("{}'s {} is {}.", f.argument, f.relation, f.result)
}

pub fn facts_text(facts: &[Fact]) -> String {
    facts.iter().map(fact_sentence).collect::<Vec<_>>().join(" ")
}

/// `"Who is b's boss?"`
pub fn hop_question(relation: &Symbol, argument: &Symbol) -> String {
    format!("Who is {argument}'s {relation}?")
}

/// Inverse of [`hop_question`], tolerant of surrounding quotes and spacing.
pub fn parse_hop_question(text: &str) -> Option<(Symbol, Symbol)> {
    let t = text.trim().trim_matches(|c| c == '"' || c == '\'' || c == '`').trim();
    let rest = t.strip_prefix("Who is ")?.trim_end_matches('?').trim();
    let (arg, rel) = rest.split_once("'s ")?;
    let (arg, rel) = (arg.trim(), rel.trim());
    if arg.is_empty() || rel.is_empty() || arg.contains(' ') || rel.contains(' ') {
        return None;
    }
    Some((Symbol::new(rel), Symbol::new(arg)))
}

/// `"Who is the friend of the boss of b?"` for chain `[friend, boss]`.
pub fn chain_question(chain: &[Symbol], start: &Symbol) -> String {
    let path: Vec<String> = chain.iter().map(|r| format!("the {r} of")).collect();
    format!("Who is {} {start}?", path.join(" "))
}
